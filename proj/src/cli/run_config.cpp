#include "skelvol/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skelvol/error.hpp"

namespace skelvol {

using json = nlohmann::ordered_json;

std::string_view to_string(Precision p) { return p == Precision::Float32 ? "float32" : "float64"; }

Precision parse_precision(std::string_view name) {
  if (name == "float32") return Precision::Float32;
  if (name == "float64") return Precision::Float64;
  throw Error(ErrorCode::InvalidParams, "precision must be float32 or float64, got '" + std::string(name) + "'");
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParams, what);
}

}  // namespace

void RunConfig::validate() const {
  require(resolution >= 1 && resolution <= 1024, "resolution must be in 1..1024");
  require(std::isfinite(margin) && margin >= 0.0, "margin must be >= 0");
  require(!levels.empty(), "level set is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(levels[i] >= 0 && levels[i] < kLevelCount, "levels must be in 0..3");
    for (std::size_t j = 0; j < i; ++j) require(levels[i] != levels[j], "duplicate level " + std::to_string(levels[i]));
  }
  require(std::find(levels.begin(), levels.end(), 0) != levels.end(), "level set must include level 0");
  (void)parse_level_fusion(fusion);
  require(dropout >= 0.0 && dropout < 1.0, "dropout must satisfy 0 <= p < 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning rate must be > 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must satisfy 0 <= m < 1");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, "weight decay must be >= 0");
  require(batch_size >= 1, "batch size must be >= 1");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0, "validation fraction must satisfy 0 <= f < 1");
  require(stop_at_train_accuracy >= 0.0 && stop_at_train_accuracy <= 1.0, "stop-at-train-accuracy must be in [0, 1]");
  (void)parse_precision(precision);
  require(eval_mode == "all" || eval_mode == "streams" || eval_mode == "levels", "eval mode must be all, streams or levels");
  require(!gen_classes.empty(), "gen needs at least one class");
  require(gen_per_class >= 1, "gen per-class count must be >= 1");
  require(gen_frames >= 4, "gen frame count must be >= 4");
  require(std::isfinite(gen_noise) && gen_noise >= 0.0, "gen noise must be >= 0");
  require(gen_subjects >= 1, "gen subject count must be >= 1");
  (void)parse_plane(plane);
  require(param_classes >= 2, "param table needs at least 2 classes");
  (void)split_spec();
}

EncodingConfig RunConfig::encoding() const { return {resolution, points_per_bone, margin}; }

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.sgd = {learning_rate, momentum, weight_decay};
  t.seed = seed;
  t.threads = threads;
  t.deterministic = deterministic;
  if (stop_at_train_accuracy > 0.0) t.stop_at_train_accuracy = stop_at_train_accuracy;
  return t;
}

std::optional<SplitSpec> RunConfig::split_spec() const {
  SplitSpec spec;
  if (split.protocol == "none") return std::nullopt;
  if (split.protocol == "cross_subject") spec = SplitSpec::cross_subject();
  else if (split.protocol == "cross_view") spec = SplitSpec::cross_view();
  else if (split.protocol == "smart_home") spec = SplitSpec::smart_home();
  else if (split.protocol == "subject_list") spec.protocol = Protocol::SubjectList;
  else throw Error(ErrorCode::InvalidParams, "unknown split protocol '" + split.protocol + "'");
  if (!split.train_ids.empty()) spec.train_ids = {split.train_ids.begin(), split.train_ids.end()};
  if (!split.test_ids.empty()) spec.test_ids = {split.test_ids.begin(), split.test_ids.end()};
  spec.validate();
  return spec;
}

std::string to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["resolution"] = c.resolution;
  j["points_per_bone"] = c.points_per_bone;
  j["margin"] = c.margin;
  j["levels"] = c.levels;
  j["fusion"] = c.fusion;
  j["dropout"] = c.dropout;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["weight_decay"] = c.weight_decay;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["deterministic"] = c.deterministic;
  j["threads"] = c.threads;
  j["validation_fraction"] = c.validation_fraction;
  j["stop_at_train_accuracy"] = c.stop_at_train_accuracy;
  j["precision"] = c.precision;
  j["split"] = {{"protocol", c.split.protocol}, {"train_ids", c.split.train_ids}, {"test_ids", c.split.test_ids}};
  j["eval_mode"] = c.eval_mode;
  j["gen_classes"] = c.gen_classes;
  j["gen_per_class"] = c.gen_per_class;
  j["gen_frames"] = c.gen_frames;
  j["gen_noise"] = c.gen_noise;
  j["gen_subjects"] = c.gen_subjects;
  j["plane"] = c.plane;
  j["slice_index"] = c.slice_index ? json(*c.slice_index) : json(nullptr);
  j["param_classes"] = c.param_classes;
  j["inputs"] = c.inputs;
  j["output"] = c.output;
  j["dataset"] = c.dataset;
  j["bundle"] = c.bundle;
  j["classes_file"] = c.classes_file;
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(std::string_view text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidParams, "config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "command") c.command = v.get<std::string>();
      else if (k == "resolution") c.resolution = v.get<std::size_t>();
      else if (k == "points_per_bone") c.points_per_bone = v.get<std::size_t>();
      else if (k == "margin") c.margin = v.get<double>();
      else if (k == "levels") c.levels = v.get<std::vector<int>>();
      else if (k == "fusion") c.fusion = v.get<std::string>();
      else if (k == "dropout") c.dropout = v.get<double>();
      else if (k == "learning_rate") c.learning_rate = v.get<double>();
      else if (k == "momentum") c.momentum = v.get<double>();
      else if (k == "weight_decay") c.weight_decay = v.get<double>();
      else if (k == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (k == "epochs") c.epochs = v.get<std::size_t>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "deterministic") c.deterministic = v.get<bool>();
      else if (k == "threads") c.threads = v.get<std::size_t>();
      else if (k == "validation_fraction") c.validation_fraction = v.get<double>();
      else if (k == "stop_at_train_accuracy") c.stop_at_train_accuracy = v.get<double>();
      else if (k == "precision") c.precision = v.get<std::string>();
      else if (k == "split") {
        for (auto s = v.begin(); s != v.end(); ++s) {
          if (s.key() == "protocol") c.split.protocol = s.value().get<std::string>();
          else if (s.key() == "train_ids") c.split.train_ids = s.value().get<std::vector<int>>();
          else if (s.key() == "test_ids") c.split.test_ids = s.value().get<std::vector<int>>();
          else throw Error(ErrorCode::InvalidParams, "unknown config key 'split." + s.key() + "'");
        }
      } else if (k == "eval_mode") c.eval_mode = v.get<std::string>();
      else if (k == "gen_classes") c.gen_classes = v.get<std::vector<std::string>>();
      else if (k == "gen_per_class") c.gen_per_class = v.get<std::size_t>();
      else if (k == "gen_frames") c.gen_frames = v.get<std::size_t>();
      else if (k == "gen_noise") c.gen_noise = v.get<double>();
      else if (k == "gen_subjects") c.gen_subjects = v.get<std::size_t>();
      else if (k == "plane") c.plane = v.get<std::string>();
      else if (k == "slice_index") {
        if (v.is_null()) c.slice_index.reset();
        else c.slice_index = v.get<std::size_t>();
      } else if (k == "param_classes") c.param_classes = v.get<std::size_t>();
      else if (k == "classes_file") c.classes_file = v.get<std::string>();
      else if (k == "inputs") c.inputs = v.get<std::vector<std::string>>();
      else if (k == "output") c.output = v.get<std::string>();
      else if (k == "dataset") c.dataset = v.get<std::string>();
      else if (k == "bundle") c.bundle = v.get<std::string>();
      else throw Error(ErrorCode::InvalidParams, "unknown config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidParams, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return run_config_from_json(ss.str());
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

void save_run_config(const std::string& dir, const RunConfig& cfg) {
  const std::string path = (std::filesystem::path(dir) / "run_config.json").string();
  std::ofstream out(path, std::ios::binary);
  out << to_json(cfg);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

}  // namespace skelvol

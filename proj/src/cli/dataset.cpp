#include "skelvol/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skelvol/error.hpp"
#include "skelvol/stream_network.hpp"

namespace skelvol {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::optional<int> get_optional_int(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<int>();
}

json encoding_json(const EncodingConfig& e) {
  return {{"resolution", e.resolution}, {"points_per_bone", e.points_per_bone}, {"margin", e.margin}};
}

EncodingConfig encoding_from(const json& j) {
  return {j.at("resolution").get<std::size_t>(), j.at("points_per_bone").get<std::size_t>(), j.at("margin").get<double>()};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, path.string() + ": cannot write");
}

json read_json(const fs::path& path, const char* format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format)
    throw Error(ErrorCode::VersionMismatch, path.string() + ": not a " + std::string(format) + " manifest");
  if (j.value("version", 0) != kManifestVersion)
    throw Error(ErrorCode::VersionMismatch, path.string() + ": unsupported manifest version");
  return j;
}

StreamKind parse_stream_kind(const std::string& s) {
  if (s == "spatial") return StreamKind::Spatial;
  if (s == "temporal") return StreamKind::Temporal;
  throw Error(ErrorCode::MalformedFile, "unknown stream kind '" + s + "'");
}

}  // namespace

std::vector<SampleMeta> EncodedDataset::metadata() const {
  std::vector<SampleMeta> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.subject_id, s.camera_id});
  return out;
}

std::string volume_relpath(const std::string& sample, int level, StreamKind kind) {
  return sample + "/L" + std::to_string(level) + "_" + std::string(to_string(kind)) + ".skvg";
}

void save_encoded_dataset(const std::string& dir, const EncodedDataset& ds) {
  const fs::path root(dir);
  fs::create_directories(root);
  json samples = json::array();
  for (const auto& s : ds.samples) {
    fs::create_directories(root / s.name);
    json levels = json::array();
    for (int l = 0; l < kLevelCount; ++l) {
      const auto& pair = s.encoded.levels[static_cast<std::size_t>(l)];
      if (!pair) continue;
      levels.push_back(l);
      for (StreamKind k : {StreamKind::Spatial, StreamKind::Temporal})
        save_volume_file((root / volume_relpath(s.name, l, k)).string(), pair->get(k));
    }
    samples.push_back({{"name", s.name},
                       {"source", s.source},
                       {"label", optional_int(s.label)},
                       {"subject", optional_int(s.subject_id)},
                       {"camera", optional_int(s.camera_id)},
                       {"frames", s.frames},
                       {"view_degenerate", s.encoded.view_degenerate},
                       {"levels", levels}});
  }
  json j{{"format", "skelvol-encoded"},
         {"version", kManifestVersion},
         {"encoding", encoding_json(ds.encoding)},
         {"levels", ds.levels},
         {"classes", ds.class_names},
         {"samples", samples}};
  write_json(root / "manifest.json", j);
}

EncodedDataset load_encoded_dataset(const std::string& dir, bool load_volumes) {
  const fs::path root(dir);
  const fs::path manifest = root / "manifest.json";
  const json j = read_json(manifest, "skelvol-encoded");
  EncodedDataset ds;
  try {
    ds.encoding = encoding_from(j.at("encoding"));
    ds.levels = j.at("levels").get<std::vector<int>>();
    ds.class_names = j.at("classes").get<std::vector<std::string>>();
    for (const auto& s : j.at("samples")) {
      EncodedSample e;
      e.name = s.at("name").get<std::string>();
      e.source = s.value("source", "");
      e.label = get_optional_int(s, "label");
      e.subject_id = get_optional_int(s, "subject");
      e.camera_id = get_optional_int(s, "camera");
      e.frames = s.value("frames", std::size_t{0});
      e.encoded.view_degenerate = s.value("view_degenerate", false);
      for (int l : s.at("levels").get<std::vector<int>>()) {
        if (l < 0 || l >= kLevelCount) throw Error(ErrorCode::MalformedFile, "level out of range");
        if (!load_volumes) continue;
        VolumePair pair{load_volume_file((root / volume_relpath(e.name, l, StreamKind::Spatial)).string()),
                        load_volume_file((root / volume_relpath(e.name, l, StreamKind::Temporal)).string())};
        if (pair.spatial.resolution != ds.encoding.resolution || pair.temporal.resolution != ds.encoding.resolution)
          throw Error(ErrorCode::MalformedFile, "sample " + e.name + " has volumes of the wrong resolution");
        if (pair.spatial.kind != VolumeKind::Spatial || pair.temporal.kind != VolumeKind::Temporal)
          throw Error(ErrorCode::MalformedFile, "sample " + e.name + " has volumes of the wrong kind");
        e.encoded.levels[static_cast<std::size_t>(l)] = std::move(pair);
      }
      ds.samples.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, manifest.string() + ": " + e.what());
  }
  return ds;
}

std::string checkpoint_name(int level, StreamKind kind) {
  return "L" + std::to_string(level) + "_" + std::string(to_string(kind)) + ".skck";
}

std::string log_name(int level, StreamKind kind) {
  return "L" + std::to_string(level) + "_" + std::string(to_string(kind)) + "_log.csv";
}

void write_bundle_manifest(const std::string& dir, const BundleManifest& m) {
  json nets = json::array();
  for (const auto& n : m.networks)
    nets.push_back({{"level", n.level}, {"stream", std::string(to_string(n.kind))}, {"checkpoint", n.checkpoint}, {"log", n.log}});
  json j{{"format", "skelvol-bundle"},
         {"version", kManifestVersion},
         {"precision", std::string(to_string(m.precision))},
         {"classes", m.classes},
         {"resolution", m.resolution},
         {"class_names", m.class_names},
         {"encoding", encoding_json(m.encoding)},
         {"levels", m.levels},
         {"networks", nets}};
  fs::create_directories(dir);
  write_json(fs::path(dir) / "manifest.json", j);
}

BundleManifest read_bundle_manifest(const std::string& dir) {
  const fs::path manifest = fs::path(dir) / "manifest.json";
  const json j = read_json(manifest, "skelvol-bundle");
  BundleManifest m;
  try {
    m.precision = parse_precision(j.at("precision").get<std::string>());
    m.classes = j.at("classes").get<std::size_t>();
    m.resolution = j.at("resolution").get<std::size_t>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.encoding = encoding_from(j.at("encoding"));
    m.levels = j.at("levels").get<std::vector<int>>();
    for (const auto& n : j.at("networks"))
      m.networks.push_back({n.at("level").get<int>(), parse_stream_kind(n.at("stream").get<std::string>()),
                            n.at("checkpoint").get<std::string>(), n.value("log", "")});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedFile, manifest.string() + ": " + e.what());
  }
  return m;
}

template <typename T>
void save_bundle_checkpoints(const std::string& dir, const MultiTemporalModel<T>& model) {
  fs::create_directories(dir);
  for (int l : model.available_levels())
    for (StreamKind k : {StreamKind::Spatial, StreamKind::Temporal})
      nn::save_checkpoint_file((fs::path(dir) / checkpoint_name(l, k)).string(), model.levels[static_cast<std::size_t>(l)]->get(k));
}

template <typename T>
MultiTemporalModel<T> load_bundle(const std::string& dir, const BundleManifest& m) {
  std::array<std::optional<nn::StreamNetwork<T>>, 2 * kLevelCount> nets;
  for (const auto& e : m.networks) {
    if (e.level < 0 || e.level >= kLevelCount) throw Error(ErrorCode::IncompatibleCheckpoint, "bundle level out of range");
    const std::string path = (fs::path(dir) / e.checkpoint).string();
    auto net = nn::load_checkpoint_file<T>(path);
    if (net.topology().classes != m.classes || net.topology().input_resolution != m.resolution)
      throw Error(ErrorCode::IncompatibleCheckpoint, path + ": class count or resolution differs from the bundle manifest");
    nets[static_cast<std::size_t>(2 * e.level + static_cast<int>(e.kind))] = std::move(net);
  }
  MultiTemporalModel<T> model;
  for (int l : m.levels) {
    if (l < 0 || l >= kLevelCount) throw Error(ErrorCode::IncompatibleCheckpoint, "bundle level out of range");
    auto& s = nets[static_cast<std::size_t>(2 * l)];
    auto& t = nets[static_cast<std::size_t>(2 * l + 1)];
    if (!s || !t) throw Error(ErrorCode::IncompatibleCheckpoint, "bundle lacks a checkpoint for level " + std::to_string(l));
    model.levels[static_cast<std::size_t>(l)] = TwoStreamModel<T>{std::move(*s), std::move(*t)};
  }
  return model;
}

void check_compatible(const BundleManifest& m, const EncodedDataset& ds) {
  if (m.classes != ds.classes())
    throw Error(ErrorCode::IncompatibleCheckpoint, "bundle has " + std::to_string(m.classes) + " classes, dataset has " +
                                                       std::to_string(ds.classes()));
  if (m.resolution != ds.encoding.resolution)
    throw Error(ErrorCode::IncompatibleCheckpoint, "bundle resolution " + std::to_string(m.resolution) + " but dataset volumes are " +
                                                       std::to_string(ds.encoding.resolution));
  if (m.encoding.points_per_bone != ds.encoding.points_per_bone || m.encoding.margin != ds.encoding.margin)
    throw Error(ErrorCode::IncompatibleCheckpoint, "bundle and dataset were encoded with different preprocessing");
}

template void save_bundle_checkpoints(const std::string&, const MultiTemporalModel<float>&);
template void save_bundle_checkpoints(const std::string&, const MultiTemporalModel<double>&);
template MultiTemporalModel<float> load_bundle(const std::string&, const BundleManifest&);
template MultiTemporalModel<double> load_bundle(const std::string&, const BundleManifest&);

}  // namespace skelvol

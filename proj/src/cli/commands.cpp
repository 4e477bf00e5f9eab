#include "skelvol/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "skelvol/dataset.hpp"
#include "skelvol/error.hpp"
#include "skelvol/eval.hpp"
#include "skelvol/parallel.hpp"
#include "skelvol/rng.hpp"
#include "skelvol/run_config.hpp"
#include "skelvol/skeleton_io.hpp"
#include "skelvol/stream_network.hpp"
#include "skelvol/synthetic.hpp"
#include "skelvol/two_stream.hpp"

namespace skelvol {

namespace fs = std::filesystem;

namespace {

// --- shared helpers -----------------------------------------------------------

std::vector<std::string> read_class_names(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    names.push_back(line.substr(b, e - b + 1));
  }
  return names;
}

bool is_sequence_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".skeleton" || ext == ".csv" || ext == ".sksq";
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in))
        if (e.is_regular_file() && is_sequence_file(e.path())) found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

std::size_t label_of(const EncodedSample& s) {
  if (!s.label) throw Error(ErrorCode::MissingMetadata, "sample " + s.name + " has no label");
  return static_cast<std::size_t>(*s.label);
}

/// Indices selected by the split side (`test` picks the test side); all
/// samples without a split.
std::vector<std::size_t> select_partition(const EncodedDataset& ds, const RunConfig& cfg, bool test) {
  const auto spec = cfg.split_spec();
  if (!spec) {
    std::vector<std::size_t> all(ds.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  const auto meta = ds.metadata();
  auto split = split_dataset(meta, *spec);
  return test ? split.test : split.train;
}

void require_levels(const std::vector<int>& wanted, const std::vector<int>& have, const std::string& what) {
  for (int l : wanted)
    if (std::find(have.begin(), have.end(), l) == have.end())
      throw Error(ErrorCode::InvalidParams, what + " has no level " + std::to_string(l));
}

void prepare_output(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::InvalidParams, "an output directory (--out) is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, dir + ": cannot create directory: " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, path.string() + ": cannot open for writing");
  return out;
}

// --- gen ----------------------------------------------------------------------

SkeletonSequence gen_class_sample(const std::string& cls, std::size_t frames, double noise, std::uint64_t seed) {
  const auto plus = cls.find('+');
  if (plus == std::string::npos) return gen_synthetic(parse_motion_kind(cls), frames, noise, seed);
  return gen_composite(parse_motion_kind(cls.substr(0, plus)), parse_motion_kind(cls.substr(plus + 1)), frames, noise, seed);
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
  prepare_output(cfg.output);
  const fs::path dir(cfg.output);
  for (std::size_t c = 0; c < cfg.gen_classes.size(); ++c) {
    for (std::size_t i = 0; i < cfg.gen_per_class; ++i) {
      // Sample i of every class shares its performer, which makes
      // sit_down/stand_up exact reversed pairs.
      const std::uint64_t seed = mix_seed(cfg.seed, i);
      SkeletonSequence seq = gen_class_sample(cfg.gen_classes[c], cfg.gen_frames, cfg.gen_noise, seed);
      Rng meta(mix_seed(seed, 0xCA3E7A));
      seq.label = static_cast<int>(c);
      seq.subject_id = static_cast<int>(1 + i % cfg.gen_subjects);
      seq.camera_id = static_cast<int>(1 + uniform_index(meta, 3));
      std::ostringstream name;
      name << 'c' << std::setw(2) << std::setfill('0') << c << '_' << cfg.gen_classes[c] << '_' << std::setw(4) << i
           << ".sksq";
      save_sequence_file((dir / name.str()).string(), seq);
    }
  }
  auto names = open_out(dir / "classes.txt");
  for (const auto& n : cfg.gen_classes) names << n << '\n';
  save_run_config(cfg.output, cfg);
  out << "wrote " << cfg.gen_classes.size() * cfg.gen_per_class << " sequences in " << cfg.gen_classes.size()
      << " classes to " << cfg.output << '\n';
  return kExitOk;
}

// --- encode -------------------------------------------------------------------

int cmd_encode(const RunConfig& cfg, std::ostream& out) {
  if (cfg.inputs.empty()) throw Error(ErrorCode::InvalidParams, "encode needs at least one input path");
  const auto files = expand_inputs(cfg.inputs);
  if (files.empty()) throw Error(ErrorCode::EmptyDataset, "no skeleton files found in the inputs");

  std::vector<std::string> class_names;
  if (!cfg.classes_file.empty()) {
    class_names = read_class_names(cfg.classes_file);
  } else {
    for (const auto& in : cfg.inputs)
      if (fs::is_directory(in) && fs::exists(fs::path(in) / "classes.txt")) {
        class_names = read_class_names((fs::path(in) / "classes.txt").string());
        break;
      }
  }

  // Parse everything first so a bad file fails before any output is written.
  std::vector<SkeletonSequence> seqs;
  seqs.reserve(files.size());
  for (const auto& f : files) seqs.push_back(load_sequence_file(f));

  EncodedDataset ds;
  ds.encoding = cfg.encoding();
  ds.levels = cfg.levels;
  std::sort(ds.levels.begin(), ds.levels.end());
  ds.samples.resize(seqs.size());
  std::map<std::string, int> used;
  int max_label = -1;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    auto& s = ds.samples[i];
    std::string stem = fs::path(files[i]).stem().string();
    const int n = used[stem]++;
    s.name = n == 0 ? stem : stem + "_" + std::to_string(n);
    s.source = files[i];
    s.label = seqs[i].label;
    s.subject_id = seqs[i].subject_id;
    s.camera_id = seqs[i].camera_id;
    s.frames = seqs[i].frame_count();
    if (s.label) {
      if (*s.label < 0) throw Error(ErrorCode::InvalidTarget, files[i] + ": negative label");
      max_label = std::max(max_label, *s.label);
    }
  }
  if (class_names.empty()) class_names = default_class_names(static_cast<std::size_t>(max_label + 1));
  if (max_label >= static_cast<int>(class_names.size()))
    throw Error(ErrorCode::InvalidTarget, "label " + std::to_string(max_label) + " exceeds the " +
                                              std::to_string(class_names.size()) + " listed classes");
  ds.class_names = class_names;

  const std::size_t workers = resolve_threads(cfg.threads, cfg.deterministic);
  parallel_chunks(seqs.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        ds.samples[i].encoded = encode_sequence(seqs[i], ds.encoding, ds.levels);
      } catch (const Error& e) {
        throw e.with_context(files[i]);
      }
    }
  });

  prepare_output(cfg.output);
  save_encoded_dataset(cfg.output, ds);
  save_run_config(cfg.output, cfg);
  std::size_t volumes = 0, short_seqs = 0, degenerate = 0;
  for (const auto& s : ds.samples) {
    std::size_t present = 0;
    for (const auto& l : s.encoded.levels) present += l ? 1 : 0;
    volumes += 2 * present;
    if (present < ds.levels.size()) ++short_seqs;
    if (s.encoded.view_degenerate) ++degenerate;
  }
  out << "encoded " << ds.samples.size() << " sequences into " << volumes << " volumes at R=" << ds.encoding.resolution
      << " in " << cfg.output << '\n';
  if (short_seqs) out << "  " << short_seqs << " sequence(s) shorter than 4 frames: level 0 only\n";
  if (degenerate) out << "  " << degenerate << " sequence(s) with degenerate view geometry: left unrotated\n";
  return kExitOk;
}

// --- train --------------------------------------------------------------------

template <typename T>
void train_with(const RunConfig& cfg, const EncodedDataset& ds, const std::vector<std::size_t>& train_idx,
                const std::vector<std::size_t>& val_idx, std::ostream& out) {
  const auto topology = nn::StreamTopology::standard(ds.encoding.resolution, ds.classes(), cfg.dropout);
  topology.validate();
  auto model = make_multi_temporal<T>(topology, cfg.seed, cfg.levels);

  std::vector<LabeledEncoding> train, val;
  for (std::size_t i : train_idx) train.push_back({&ds.samples[i].encoded, label_of(ds.samples[i])});
  for (std::size_t i : val_idx) val.push_back({&ds.samples[i].encoded, label_of(ds.samples[i])});

  const auto logs = train_multi_temporal(model, train, val, cfg.train_config());

  save_bundle_checkpoints(cfg.output, model);
  BundleManifest m;
  m.precision = std::is_same_v<T, float> ? Precision::Float32 : Precision::Float64;
  m.classes = ds.classes();
  m.resolution = ds.encoding.resolution;
  m.class_names = ds.class_names;
  m.encoding = ds.encoding;
  m.levels = model.available_levels();
  for (const auto& nl : logs) {
    m.networks.push_back({nl.level, nl.kind, checkpoint_name(nl.level, nl.kind), log_name(nl.level, nl.kind)});
    auto f = open_out(fs::path(cfg.output) / log_name(nl.level, nl.kind));
    nl.log.write_csv(f);
    out << "level " << nl.level << ' ' << std::left << std::setw(8) << to_string(nl.kind) << std::right << " epochs "
        << nl.log.epochs.size();
    if (!nl.log.epochs.empty()) {
      const auto& last = nl.log.epochs.back();
      out << "  loss " << std::setprecision(4) << last.train_loss << "  train err " << last.train_error;
      if (!std::isnan(last.best_validation_error)) out << "  best val err " << last.best_validation_error;
      out << std::setprecision(6);
    }
    out << '\n';
  }
  write_bundle_manifest(cfg.output, m);
}

int cmd_train(RunConfig cfg, std::ostream& out) {
  if (cfg.dataset.empty()) throw Error(ErrorCode::InvalidParams, "train needs a dataset directory");
  const EncodedDataset ds = load_encoded_dataset(cfg.dataset);
  // The dataset fixes the preprocessing; record what was actually used.
  cfg.resolution = ds.encoding.resolution;
  cfg.points_per_bone = ds.encoding.points_per_bone;
  cfg.margin = ds.encoding.margin;
  require_levels(cfg.levels, ds.levels, "dataset " + cfg.dataset);
  if (ds.classes() < 2) throw Error(ErrorCode::InvalidParams, "training needs at least 2 classes");

  std::vector<std::size_t> train_idx = select_partition(ds, cfg, false);
  if (train_idx.empty()) throw Error(ErrorCode::EmptyDataset, "no training samples");
  for (std::size_t i : train_idx) (void)label_of(ds.samples[i]);
  std::vector<std::size_t> val_idx;
  if (cfg.validation_fraction > 0.0) {
    const auto vs = validation_split(train_idx.size(), cfg.validation_fraction, mix_seed(cfg.seed, 0x7A1));
    std::vector<std::size_t> tr;
    for (std::size_t i : vs.train) tr.push_back(train_idx[i]);
    for (std::size_t i : vs.test) val_idx.push_back(train_idx[i]);
    train_idx = std::move(tr);
  }

  prepare_output(cfg.output);
  out << "training " << 2 * cfg.levels.size() << " networks on " << train_idx.size() << " samples (" << val_idx.size()
      << " validation), R=" << ds.encoding.resolution << ", K=" << ds.classes() << '\n';
  if (parse_precision(cfg.precision) == Precision::Float32) train_with<float>(cfg, ds, train_idx, val_idx, out);
  else train_with<double>(cfg, ds, train_idx, val_idx, out);
  save_run_config(cfg.output, cfg);
  out << "bundle written to " << cfg.output << '\n';
  return kExitOk;
}

// --- eval ---------------------------------------------------------------------

template <typename T>
std::vector<AblationRow> eval_with(const RunConfig& cfg, const BundleManifest& m, const EncodedDataset& ds,
                                   const std::vector<std::size_t>& test_idx) {
  MultiTemporalModel<T> model = load_bundle<T>(cfg.bundle, m);
  for (int l = 0; l < kLevelCount; ++l)
    if (std::find(cfg.levels.begin(), cfg.levels.end(), l) == cfg.levels.end()) model.levels[static_cast<std::size_t>(l)].reset();
  std::vector<LabeledEncoding> test;
  for (std::size_t i : test_idx) test.push_back({&ds.samples[i].encoded, label_of(ds.samples[i])});
  return evaluate_ablation(model, test, cfg.level_fusion(), resolve_threads(cfg.threads, cfg.deterministic));
}

int cmd_eval(RunConfig cfg, bool levels_given, std::ostream& out) {
  if (cfg.bundle.empty() || cfg.dataset.empty()) throw Error(ErrorCode::InvalidParams, "eval needs a bundle and a dataset");
  const BundleManifest m = read_bundle_manifest(cfg.bundle);
  const EncodedDataset ds = load_encoded_dataset(cfg.dataset);
  check_compatible(m, ds);
  if (!levels_given) cfg.levels = m.levels;
  require_levels(cfg.levels, m.levels, "bundle " + cfg.bundle);
  cfg.resolution = ds.encoding.resolution;
  cfg.points_per_bone = ds.encoding.points_per_bone;
  cfg.margin = ds.encoding.margin;
  cfg.precision = std::string(to_string(m.precision));

  const auto test_idx = select_partition(ds, cfg, true);
  if (test_idx.empty()) throw Error(ErrorCode::EmptyPartition, "test partition is empty");
  auto rows = m.precision == Precision::Float32 ? eval_with<float>(cfg, m, ds, test_idx) : eval_with<double>(cfg, m, ds, test_idx);

  if (cfg.eval_mode == "streams") rows.resize(3);
  else if (cfg.eval_mode == "levels") rows.erase(rows.begin(), rows.begin() + 3);

  prepare_output(cfg.output);
  const fs::path dir(cfg.output);
  {
    auto f = open_out(dir / "ablation.csv");
    write_ablation_csv(f, rows);
  }
  const AblationRow& best = rows.back();
  {
    auto f = open_out(dir / "per_class.csv");
    write_per_class_csv(f, best.report, m.class_names);
  }
  {
    auto f = open_out(dir / "confusion.csv");
    write_confusion_csv(f, best.report, m.class_names);
  }
  {
    auto f = open_out(dir / "summary.txt");
    write_summary(f, rows, m.class_names);
  }
  save_run_config(cfg.output, cfg);
  write_summary(out, rows, m.class_names);
  return kExitOk;
}

// --- inspect ------------------------------------------------------------------

void print_param_table(const nn::StreamTopology& t, std::ostream& out) {
  const auto rows = nn::param_table(t);
  out << std::left << std::setw(10) << "layer" << std::setw(24) << "shape" << std::right << std::setw(12) << "params" << '\n';
  std::size_t total = 0;
  for (const auto& r : rows) {
    out << std::left << std::setw(10) << r.layer << std::setw(24) << r.shape << std::right << std::setw(12) << r.count << '\n';
    total += r.count;
  }
  out << std::left << std::setw(34) << "total" << std::right << std::setw(12) << total << '\n';
}

void inspect_volume(const RunConfig& cfg, const std::string& path, std::ostream& out) {
  const VoxelGrid grid = load_volume_file(path);
  const Plane plane = parse_plane(cfg.plane);
  const Image2D img = cfg.slice_index ? extract_slice(grid, plane, *cfg.slice_index) : max_projection(grid, plane);
  prepare_output(cfg.output);
  const std::string stem = fs::path(path).stem().string() + "_" + cfg.plane + "_" +
                           (cfg.slice_index ? std::to_string(*cfg.slice_index) : std::string("max"));
  const fs::path dir(cfg.output);
  {
    auto f = open_out(dir / (stem + ".pgm"));
    write_pgm(f, img);
  }
  {
    auto f = open_out(dir / (stem + ".csv"));
    write_image_csv(f, img);
  }
  save_run_config(cfg.output, cfg);
  std::set<long> levels;
  for (float v : img.pixels) levels.insert(std::lround(255.0 * v));
  out << path << ": " << (grid.kind == VolumeKind::Spatial ? "spatial" : "temporal") << " volume, R=" << grid.resolution
      << ", " << grid.nonzero_count() << " occupied voxels, half-extent " << grid.bounds.half_extent << " m\n";
  out << "  " << img.width << "x" << img.height << " image with " << levels.size() << " gray level(s) -> "
      << (dir / (stem + ".pgm")).string() << '\n';
}

template <typename T>
void inspect_checkpoint_as(const std::string& path, std::ostream& out) {
  const auto net = nn::load_checkpoint_file<T>(path);
  out << path << ": " << (sizeof(T) == 4 ? "float32" : "float64") << " stream, R=" << net.topology().input_resolution
      << ", K=" << net.topology().classes << ", dropout " << net.topology().dropout << '\n';
  print_param_table(net.topology(), out);
}

void inspect_checkpoint(const std::string& path, std::ostream& out) {
  try {
    inspect_checkpoint_as<float>(path, out);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IncompatibleCheckpoint) throw;
    inspect_checkpoint_as<double>(path, out);
  }
}

void inspect_log(const std::string& path, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
  std::string line;
  std::getline(in, line);
  if (line != "epoch,train_loss,train_error,val_error,best_val_error")
    throw Error(ErrorCode::MalformedFile, path + ": not a training log");
  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 5> r{};
    std::istringstream ss(line);
    std::string field;
    for (auto& v : r) {
      if (!std::getline(ss, field, ',')) throw Error(ErrorCode::MalformedFile, path + ": short row");
      try {
        v = std::stod(field);
      } catch (const std::exception&) {
        v = std::nan("");
      }
    }
    rows.push_back(r);
  }
  out << path << ": " << rows.size() << " epochs\n";
  if (rows.empty()) return;
  std::size_t stride = std::max<std::size_t>(1, rows.size() / 10);
  out << "  epoch  train_loss  train_err  val_err  best_val\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i % stride != 0 && i + 1 != rows.size()) continue;
    const auto& r = rows[i];
    out << "  " << std::setw(5) << static_cast<long>(r[0]) << std::fixed << std::setprecision(4) << std::setw(12) << r[1]
        << std::setw(11) << r[2] << std::setw(9) << r[3] << std::setw(10) << r[4] << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

int cmd_inspect(const RunConfig& cfg, bool params, std::ostream& out) {
  if (cfg.inputs.empty()) {
    if (!params) throw Error(ErrorCode::InvalidParams, "inspect needs a file or --params");
    const auto t = nn::StreamTopology::standard(cfg.resolution, cfg.param_classes, cfg.dropout);
    out << "standard stream, R=" << cfg.resolution << ", K=" << cfg.param_classes << '\n';
    print_param_table(t, out);
    return kExitOk;
  }
  for (const auto& path : cfg.inputs) {
    const std::string ext = fs::path(path).extension().string();
    if (ext == ".skvg") inspect_volume(cfg, path, out);
    else if (ext == ".skck") inspect_checkpoint(path, out);
    else if (ext == ".csv") inspect_log(path, out);
    else throw Error(ErrorCode::InvalidParams, path + ": cannot inspect files of type '" + ext + "'");
  }
  return kExitOk;
}

// --- argument parsing ---------------------------------------------------------

std::optional<std::string> find_config_arg(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void add_encoding_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--resolution,-R", cfg.resolution, "Voxel grid resolution per axis");
  app.add_option("--points-per-bone,-k", cfg.points_per_bone, "Interpolated points per bone");
  app.add_option("--margin", cfg.margin, "Relative margin around the skeleton bounding cube");
}

void add_threading_options(CLI::App& app, RunConfig& cfg) {
  app.add_flag("--deterministic,!--no-deterministic", cfg.deterministic, "Single-threaded, bit-reproducible execution");
  app.add_option("--threads", cfg.threads, "Worker threads when not deterministic (0 = all cores)");
}

void add_split_options(CLI::App& app, RunConfig& cfg) {
  app.add_option("--split", cfg.split.protocol, "none, cross_subject, cross_view, smart_home or subject_list");
  app.add_option("--train-ids", cfg.split.train_ids, "Override the training subject/camera ids")->delimiter(',');
  app.add_option("--test-ids", cfg.split.test_ids, "Override the test subject/camera ids")->delimiter(',');
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    if (auto path = find_config_arg(args)) cfg = load_run_config(*path);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserError;
  }

  CLI::App app{"Skeleton action recognition with two-stream 3D CNNs over voxelized skeleton volumes"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration; command-line flags take precedence");
  app.set_version_flag("--version", "skelvol 1.0.0");

  auto* gen = app.add_subcommand("gen", "Generate a synthetic labelled skeleton dataset");
  gen->add_option("--out,-o", cfg.output, "Output directory");
  gen->add_option("--classes", cfg.gen_classes, "Motion kinds, or first+second composites")->delimiter(',');
  gen->add_option("--per-class", cfg.gen_per_class, "Sequences per class");
  gen->add_option("--frames", cfg.gen_frames, "Frames per sequence");
  gen->add_option("--noise", cfg.gen_noise, "Gaussian joint noise sigma in meters");
  gen->add_option("--subjects", cfg.gen_subjects, "Performer ids cycle through 1..N");
  gen->add_option("--seed", cfg.seed, "Random seed");

  auto* enc = app.add_subcommand("encode", "Encode skeleton files into spatial and temporal volumes");
  enc->add_option("inputs", cfg.inputs, "Skeleton files (.skeleton, .csv, .sksq) or directories");
  enc->add_option("--out,-o", cfg.output, "Output dataset directory");
  enc->add_option("--levels", cfg.levels, "Temporal levels to encode")->delimiter(',');
  enc->add_option("--class-names", cfg.classes_file, "File with one class name per line");
  add_encoding_options(*enc, cfg);
  add_threading_options(*enc, cfg);

  auto* train = app.add_subcommand("train", "Train the eight stream networks on an encoded dataset");
  train->add_option("dataset", cfg.dataset, "Encoded dataset directory");
  train->add_option("--out,-o", cfg.output, "Output bundle directory");
  train->add_option("--levels", cfg.levels, "Temporal levels to train")->delimiter(',');
  train->add_option("--epochs", cfg.epochs, "Training epochs per network");
  train->add_option("--batch-size", cfg.batch_size, "Mini-batch size");
  train->add_option("--lr", cfg.learning_rate, "Learning rate");
  train->add_option("--momentum", cfg.momentum, "SGD momentum");
  train->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
  train->add_option("--dropout", cfg.dropout, "Dropout probability after each conv block");
  train->add_option("--seed", cfg.seed, "Seed for initialization, shuffling and dropout");
  train->add_option("--validation-fraction", cfg.validation_fraction, "Held-out share of the training partition (0 = none)");
  train->add_option("--stop-at-train-accuracy", cfg.stop_at_train_accuracy, "Stop once training accuracy reaches this (0 = off)");
  train->add_option("--precision", cfg.precision, "float32 or float64");
  add_split_options(*train, cfg);
  add_threading_options(*train, cfg);

  auto* ev = app.add_subcommand("eval", "Evaluate a bundle; writes the stream and level ablation tables");
  ev->add_option("bundle", cfg.bundle, "Checkpoint bundle directory");
  ev->add_option("dataset", cfg.dataset, "Encoded dataset directory");
  ev->add_option("--out,-o", cfg.output, "Report directory");
  auto* ev_levels = ev->add_option("--levels", cfg.levels, "Levels to fuse (default: all in the bundle)")->delimiter(',');
  ev->add_option("--fusion", cfg.fusion, "Level fusion: product or average");
  ev->add_option("--mode", cfg.eval_mode, "all, streams or levels");
  add_split_options(*ev, cfg);
  add_threading_options(*ev, cfg);

  auto* ins = app.add_subcommand("inspect", "Export volume slices, or describe checkpoints and training logs");
  ins->add_option("inputs", cfg.inputs, ".skvg volume, .skck checkpoint or training log .csv");
  ins->add_option("--out,-o", cfg.output, "Directory for exported images");
  ins->add_option("--plane", cfg.plane, "xy, xz or yz");
  std::size_t index = 0;
  auto* index_opt = ins->add_option("--index", index, "Slice index (default: max projection)");
  bool params = false;
  ins->add_flag("--params", params, "Print the parameter table of a standard stream");
  ins->add_option("--resolution,-R", cfg.resolution, "Resolution for --params");
  ins->add_option("--classes", cfg.param_classes, "Class count for --params");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (*index_opt) cfg.slice_index = index;
    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    cfg.validate();
    if (sub == gen) return cmd_gen(cfg, out);
    if (sub == enc) return cmd_encode(cfg, out);
    if (sub == train) return cmd_train(cfg, out);
    if (sub == ev) return cmd_eval(cfg, ev_levels->count() > 0, out);
    return cmd_inspect(cfg, params, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::NumericError ? kExitInternalError : kExitUserError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
}

}  // namespace skelvol

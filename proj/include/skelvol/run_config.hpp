#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skelvol/eval.hpp"
#include "skelvol/two_stream.hpp"

namespace skelvol {

enum class Precision { Float32, Float64 };
std::string_view to_string(Precision p);
Precision parse_precision(std::string_view name);

/// Split choice for train/eval; `none` uses every sample.
struct SplitConfig {
  std::string protocol = "none";  // none | cross_subject | cross_view | subject_list | smart_home
  std::vector<int> train_ids;     // empty: protocol default
  std::vector<int> test_ids;
};

/// Every knob of every command. Written as run_config.json into each output
/// directory.
struct RunConfig {
  std::string command;

  std::size_t resolution = kDefaultResolution;
  std::size_t points_per_bone = 10;
  double margin = kDefaultMargin;
  std::vector<int> levels{0, 1, 2, 3};
  std::string fusion = "product";

  double dropout = 0.3;
  double learning_rate = 0.0005;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::size_t batch_size = 32;
  std::size_t epochs = 250;
  std::uint64_t seed = 0;
  bool deterministic = true;
  std::size_t threads = 1;
  double validation_fraction = 0.10;
  double stop_at_train_accuracy = 0.0;  // 0 disables early stopping
  std::string precision = "float32";
  SplitConfig split;
  std::string eval_mode = "all";  // all | streams | levels

  // gen
  std::vector<std::string> gen_classes{"raise_arm", "wave_hand", "sit_down", "circle"};
  std::size_t gen_per_class = 10;
  std::size_t gen_frames = 40;
  double gen_noise = 0.01;
  std::size_t gen_subjects = 9;

  // inspect
  std::string plane = "xy";
  std::optional<std::size_t> slice_index;  // none: max projection
  std::size_t param_classes = 60;

  std::vector<std::string> inputs;
  std::string output;
  std::string dataset;
  std::string bundle;
  std::string classes_file;

  /// InvalidParams naming the first out-of-range field.
  void validate() const;

  EncodingConfig encoding() const;
  TrainConfig train_config() const;
  LevelFusion level_fusion() const { return parse_level_fusion(fusion); }
  /// Null when protocol is `none`.
  std::optional<SplitSpec> split_spec() const;
};

std::string to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are InvalidParams.
RunConfig run_config_from_json(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& dir, const RunConfig& cfg);

}  // namespace skelvol

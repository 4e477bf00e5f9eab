#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skelvol/sgd.hpp"
#include "skelvol/skeleton.hpp"
#include "skelvol/stream_network.hpp"
#include "skelvol/voxel.hpp"

namespace skelvol {

using nn::ProbVector;
/// Fused class scores: non-negative, not renormalized.
using ScoreVector = std::vector<double>;

inline constexpr int kLevelCount = 4;

enum class StreamKind { Spatial = 0, Temporal = 1 };
std::string_view to_string(StreamKind kind);

enum class LevelFusion { Product, Average };
LevelFusion parse_level_fusion(const std::string& name);
std::string_view to_string(LevelFusion fusion);

// --- fusion --------------------------------------------------------------------

/// Elementwise product of the two streams' class probabilities.
ScoreVector fuse_streams(std::span<const double> spatial, std::span<const double> temporal);

/// Index of the maximum; ties go to the lowest index.
std::size_t predict_label(std::span<const double> scores);

/// Elementwise product (or mean) over the per-level scores.
ScoreVector fuse_levels(std::span<const ScoreVector> level_scores, LevelFusion fusion = LevelFusion::Product);

// --- encoding ------------------------------------------------------------------

struct EncodingConfig {
  std::size_t resolution = kDefaultResolution;
  std::size_t points_per_bone = 10;
  double margin = kDefaultMargin;
};

struct VolumePair {
  VoxelGrid spatial;
  VoxelGrid temporal;

  const VoxelGrid& get(StreamKind kind) const { return kind == StreamKind::Spatial ? spatial : temporal; }
};

/// Per-level volumes of one sequence. Levels 1-3 stay empty for sequences
/// shorter than 4 frames.
struct EncodedSequence {
  std::array<std::optional<VolumePair>, kLevelCount> levels;
  bool view_degenerate = false;
};

/// Slice, densify, fit bounds and encode one level of an already
/// normalized sequence.
VolumePair encode_level(const SkeletonSequence& normalized, int level, const EncodingConfig& cfg);

/// Hip-centering and view normalization, then encode_level for each
/// requested level the sequence is long enough for.
EncodedSequence encode_sequence(const SkeletonSequence& seq, const EncodingConfig& cfg,
                                std::span<const int> levels = std::array{0, 1, 2, 3});

// --- models --------------------------------------------------------------------

template <typename T>
struct TwoStreamModel {
  nn::StreamNetwork<T> spatial;
  nn::StreamNetwork<T> temporal;

  std::size_t classes() const { return spatial.topology().classes; }
  nn::StreamNetwork<T>& get(StreamKind k) { return k == StreamKind::Spatial ? spatial : temporal; }
  const nn::StreamNetwork<T>& get(StreamKind k) const { return k == StreamKind::Spatial ? spatial : temporal; }

  ScoreVector predict(const VolumePair& volumes) const;
};

/// Seed of the network for (level, stream) derived from a run seed.
std::uint64_t network_seed(std::uint64_t base_seed, int level, StreamKind kind);

template <typename T>
TwoStreamModel<T> make_two_stream(const nn::StreamTopology& topology, std::uint64_t base_seed, int level);

template <typename T>
struct MultiTemporalModel {
  std::array<std::optional<TwoStreamModel<T>>, kLevelCount> levels;

  std::vector<int> available_levels() const;
  std::size_t classes() const;
  std::size_t resolution() const;
};

/// Fresh model with a two-stream pair for every listed level; all levels
/// share the topology.
template <typename T>
MultiTemporalModel<T> make_multi_temporal(const nn::StreamTopology& topology, std::uint64_t base_seed,
                                          std::span<const int> levels);

// --- inference -----------------------------------------------------------------

struct PipelineConfig {
  EncodingConfig encoding;
  std::vector<int> levels{0, 1, 2, 3};
  LevelFusion fusion = LevelFusion::Product;
};

/// Everything the ablations need from one sample.
struct PipelineScores {
  std::array<std::optional<ProbVector>, kLevelCount> spatial;
  std::array<std::optional<ProbVector>, kLevelCount> temporal;
  std::array<std::optional<ScoreVector>, kLevelCount> fused;
  ScoreVector combined;  // fuse_levels over the used levels
  std::vector<int> used_levels;
  std::size_t label = 0;
};

/// Scores the levels present in both `encoded` and `model` and restricted to
/// `levels`. Level 0 must be available.
template <typename T>
PipelineScores score_encoded(const EncodedSequence& encoded, const MultiTemporalModel<T>& model,
                             std::span<const int> levels, LevelFusion fusion);

/// Full path from raw skeletons to a class id.
template <typename T>
std::size_t run_pipeline(const SkeletonSequence& seq, const MultiTemporalModel<T>& model, const PipelineConfig& cfg);

// --- training ------------------------------------------------------------------

struct TrainConfig {
  std::size_t epochs = 250;
  std::size_t batch_size = 32;
  nn::SgdConfig sgd;
  std::uint64_t seed = 0;
  /// Worker threads per mini-batch (0 = hardware concurrency). Ignored in
  /// deterministic mode, which runs single-threaded.
  std::size_t threads = 1;
  bool deterministic = true;
  /// Stop once inference-mode training accuracy reaches this value.
  std::optional<double> stop_at_train_accuracy;
};

struct LabeledVolume {
  const VoxelGrid* volume = nullptr;
  std::size_t label = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_error = 0.0;      // running error over the epoch's mini-batches
  double validation_error = 0.0; // NaN without a validation set
  double best_validation_error = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  /// Header `epoch,train_loss,train_error,val_error,best_val_error`.
  void write_csv(std::ostream& out) const;
};

/// Mini-batch SGD with momentum on one stream. Throws EmptyDataset,
/// ClassMissing (some class in 0..K-1 has no training sample), InvalidTarget
/// and NumericError (non-finite loss or gradient).
template <typename T>
TrainLog train_stream(nn::StreamNetwork<T>& net, std::span<const LabeledVolume> train,
                      std::span<const LabeledVolume> validation, const TrainConfig& cfg);

/// Fraction of samples whose argmax prediction equals the label.
template <typename T>
double stream_accuracy(const nn::StreamNetwork<T>& net, std::span<const LabeledVolume> samples);

struct LabeledEncoding {
  const EncodedSequence* encoded = nullptr;
  std::size_t label = 0;
};

struct NetworkLog {
  int level = 0;
  StreamKind kind = StreamKind::Spatial;
  TrainLog log;
};

/// Trains every network of `model` independently on the samples that have
/// volumes at its level. Each network's run seed is derived from cfg.seed.
template <typename T>
std::vector<NetworkLog> train_multi_temporal(MultiTemporalModel<T>& model, std::span<const LabeledEncoding> train,
                                             std::span<const LabeledEncoding> validation, const TrainConfig& cfg);

}  // namespace skelvol

#include "skelvol/two_stream.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "skelvol/error.hpp"
#include "skelvol/parallel.hpp"
#include "skelvol/preprocess.hpp"
#include "skelvol/rng.hpp"

namespace skelvol {

std::string_view to_string(StreamKind kind) { return kind == StreamKind::Spatial ? "spatial" : "temporal"; }

LevelFusion parse_level_fusion(const std::string& name) {
  if (name == "product") return LevelFusion::Product;
  if (name == "average") return LevelFusion::Average;
  throw Error(ErrorCode::InvalidParams, "unknown level fusion '" + name + "' (expected product or average)");
}

std::string_view to_string(LevelFusion fusion) { return fusion == LevelFusion::Product ? "product" : "average"; }

// --- fusion --------------------------------------------------------------------

ScoreVector fuse_streams(std::span<const double> spatial, std::span<const double> temporal) {
  if (spatial.size() != temporal.size())
    throw Error(ErrorCode::LengthMismatch, "stream outputs have " + std::to_string(spatial.size()) + " and " +
                                               std::to_string(temporal.size()) + " classes");
  ScoreVector out(spatial.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = spatial[i] * temporal[i];
  return out;
}

std::size_t predict_label(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::InvalidParams, "predict_label on empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

ScoreVector fuse_levels(std::span<const ScoreVector> level_scores, LevelFusion fusion) {
  if (level_scores.empty()) throw Error(ErrorCode::InvalidParams, "fuse_levels needs at least one level");
  const std::size_t K = level_scores.front().size();
  for (const auto& v : level_scores)
    if (v.size() != K) throw Error(ErrorCode::LengthMismatch, "level score vectors differ in length");
  // Per-class values are combined in sorted order so any permutation of
  // the levels gives a bit-identical result.
  ScoreVector out(K);
  std::vector<double> column(level_scores.size());
  for (std::size_t i = 0; i < K; ++i) {
    for (std::size_t l = 0; l < level_scores.size(); ++l) column[l] = level_scores[l][i];
    std::sort(column.begin(), column.end());
    double acc = fusion == LevelFusion::Product ? 1.0 : 0.0;
    for (double v : column) acc = fusion == LevelFusion::Product ? acc * v : acc + v;
    out[i] = fusion == LevelFusion::Product ? acc : acc / static_cast<double>(column.size());
  }
  return out;
}

// --- encoding ------------------------------------------------------------------

VolumePair encode_level(const SkeletonSequence& normalized, int level, const EncodingConfig& cfg) {
  const SkeletonSequence sub = temporal_subsequence(normalized, level);
  const PointCloudSequence pcs = interpolate_bones(sub, cfg.points_per_bone);
  const GridBounds bounds = fit_bounds(pcs, cfg.margin);
  return {encode_spatial(pcs, bounds, cfg.resolution), encode_temporal(pcs, bounds, cfg.resolution)};
}

EncodedSequence encode_sequence(const SkeletonSequence& seq, const EncodingConfig& cfg, std::span<const int> levels) {
  if (seq.frames.empty()) throw Error(ErrorCode::EmptySequence, "cannot encode an empty sequence");
  EncodedSequence out;
  ViewNormalization vn = view_normalize(center_on_hip(seq));
  out.view_degenerate = vn.degenerate;
  for (int level : levels) {
    if (level < 0 || level >= kLevelCount) throw Error(ErrorCode::InvalidParams, "level must be in 0..3");
    if (level > 0 && vn.sequence.frames.size() < 4) continue;  // level-0-only fallback
    out.levels[static_cast<std::size_t>(level)] = encode_level(vn.sequence, level, cfg);
  }
  return out;
}

// --- models --------------------------------------------------------------------

template <typename T>
ScoreVector TwoStreamModel<T>::predict(const VolumePair& volumes) const {
  return fuse_streams(spatial.predict(volumes.spatial), temporal.predict(volumes.temporal));
}

std::uint64_t network_seed(std::uint64_t base_seed, int level, StreamKind kind) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(2 * level + static_cast<int>(kind)));
}

template <typename T>
TwoStreamModel<T> make_two_stream(const nn::StreamTopology& topology, std::uint64_t base_seed, int level) {
  return {nn::StreamNetwork<T>(topology, network_seed(base_seed, level, StreamKind::Spatial)),
          nn::StreamNetwork<T>(topology, network_seed(base_seed, level, StreamKind::Temporal))};
}

template <typename T>
std::vector<int> MultiTemporalModel<T>::available_levels() const {
  std::vector<int> out;
  for (int l = 0; l < kLevelCount; ++l)
    if (levels[static_cast<std::size_t>(l)]) out.push_back(l);
  return out;
}

template <typename T>
std::size_t MultiTemporalModel<T>::classes() const {
  for (const auto& l : levels)
    if (l) return l->classes();
  return 0;
}

template <typename T>
std::size_t MultiTemporalModel<T>::resolution() const {
  for (const auto& l : levels)
    if (l) return l->spatial.topology().input_resolution;
  return 0;
}

template <typename T>
MultiTemporalModel<T> make_multi_temporal(const nn::StreamTopology& topology, std::uint64_t base_seed,
                                          std::span<const int> levels) {
  MultiTemporalModel<T> m;
  for (int l : levels) {
    if (l < 0 || l >= kLevelCount) throw Error(ErrorCode::InvalidParams, "level must be in 0..3");
    m.levels[static_cast<std::size_t>(l)] = make_two_stream<T>(topology, base_seed, l);
  }
  return m;
}

// --- inference -----------------------------------------------------------------

template <typename T>
PipelineScores score_encoded(const EncodedSequence& encoded, const MultiTemporalModel<T>& model,
                             std::span<const int> levels, LevelFusion fusion) {
  PipelineScores s;
  std::vector<ScoreVector> per_level;
  for (int l : levels) {
    if (l < 0 || l >= kLevelCount) throw Error(ErrorCode::InvalidParams, "level must be in 0..3");
    const auto idx = static_cast<std::size_t>(l);
    if (!encoded.levels[idx] || !model.levels[idx]) continue;
    const auto& pair = *encoded.levels[idx];
    const auto& m = *model.levels[idx];
    s.spatial[idx] = m.spatial.predict(pair.spatial);
    s.temporal[idx] = m.temporal.predict(pair.temporal);
    s.fused[idx] = fuse_streams(*s.spatial[idx], *s.temporal[idx]);
    per_level.push_back(*s.fused[idx]);
    s.used_levels.push_back(l);
  }
  if (per_level.empty()) throw Error(ErrorCode::InvalidParams, "no requested level is available in both model and sample");
  s.combined = fuse_levels(per_level, fusion);
  s.label = predict_label(s.combined);
  return s;
}

template <typename T>
std::size_t run_pipeline(const SkeletonSequence& seq, const MultiTemporalModel<T>& model, const PipelineConfig& cfg) {
  const EncodedSequence enc = encode_sequence(seq, cfg.encoding, cfg.levels);
  return score_encoded(enc, model, cfg.levels, cfg.fusion).label;
}

// --- training ------------------------------------------------------------------

void TrainLog::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,train_error,val_error,best_val_error\n";
  out << std::setprecision(17);
  for (const auto& e : epochs)
    out << e.epoch << ',' << e.train_loss << ',' << e.train_error << ',' << e.validation_error << ','
        << e.best_validation_error << '\n';
}

namespace {

void check_dataset(std::span<const LabeledVolume> samples, std::size_t classes, std::size_t resolution, bool require_all) {
  std::vector<bool> seen(classes, false);
  for (const auto& s : samples) {
    if (!s.volume) throw Error(ErrorCode::InvalidParams, "null volume in dataset");
    if (s.label >= classes)
      throw Error(ErrorCode::InvalidTarget, "label " + std::to_string(s.label) + " out of range for " + std::to_string(classes) + " classes");
    if (s.volume->resolution != resolution)
      throw Error(ErrorCode::ShapeMismatch, "volume resolution " + std::to_string(s.volume->resolution) + " but network expects " +
                                                std::to_string(resolution));
    seen[s.label] = true;
  }
  if (require_all)
    for (std::size_t c = 0; c < classes; ++c)
      if (!seen[c]) throw Error(ErrorCode::ClassMissing, "no training sample for class " + std::to_string(c));
}

}  // namespace

template <typename T>
double stream_accuracy(const nn::StreamNetwork<T>& net, std::span<const LabeledVolume> samples) {
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (const auto& s : samples)
    if (predict_label(net.predict(*s.volume)) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

template <typename T>
TrainLog train_stream(nn::StreamNetwork<T>& net, std::span<const LabeledVolume> train,
                      std::span<const LabeledVolume> validation, const TrainConfig& cfg) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (cfg.batch_size == 0) throw Error(ErrorCode::InvalidParams, "batch size must be at least 1");
  const std::size_t K = net.topology().classes;
  const std::size_t R = net.topology().input_resolution;
  check_dataset(train, K, R, true);
  check_dataset(validation, K, R, false);

  const std::size_t workers = resolve_threads(cfg.threads, cfg.deterministic);
  nn::SgdOptimizer<T> optimizer(net.parameters(), cfg.sgd);
  nn::GradientBuffer<T> total = net.make_gradients();
  std::vector<nn::GradientBuffer<T>> local(workers, net.make_gradients());
  std::vector<double> local_loss(workers);
  std::vector<std::size_t> local_correct(workers);

  Rng order_rng(mix_seed(cfg.seed, 0xD1CEull));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainLog log;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      parallel_chunks(count, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
        local[w].zero();
        local_loss[w] = 0.0;
        local_correct[w] = 0;
        for (std::size_t b = begin; b < end; ++b) {
          const std::size_t pos = start + b;
          const auto& sample = train[order[pos]];
          const std::uint64_t dropout_seed = mix_seed(cfg.seed, (epoch << 32) ^ pos);
          auto r = net.backprop(net.make_input(*sample.volume), sample.label, true, dropout_seed, local[w]);
          local_loss[w] += r.loss;
          if (predict_label(r.probs) == sample.label) ++local_correct[w];
        }
      });
      total.zero();
      const std::size_t used = std::min(workers, count);
      for (std::size_t w = 0; w < used; ++w) {
        total.add(local[w]);
        loss_sum += local_loss[w];
        correct += local_correct[w];
      }
      total.scale(static_cast<T>(1.0 / static_cast<double>(count)));
      if (!std::isfinite(loss_sum) || !total.all_finite())
        throw Error(ErrorCode::NumericError, "non-finite loss or gradient at epoch " + std::to_string(epoch));
      optimizer.step(net.parameters(), total.spans());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_error = 1.0 - static_cast<double>(correct) / static_cast<double>(train.size());
    if (validation.empty()) {
      rec.validation_error = std::numeric_limits<double>::quiet_NaN();
      rec.best_validation_error = rec.validation_error;
    } else {
      rec.validation_error = 1.0 - stream_accuracy(net, validation);
      best_val = std::min(best_val, rec.validation_error);
      rec.best_validation_error = best_val;
    }
    log.epochs.push_back(rec);

    if (cfg.stop_at_train_accuracy && stream_accuracy(net, train) >= *cfg.stop_at_train_accuracy)
      break;
  }
  return log;
}

template <typename T>
std::vector<NetworkLog> train_multi_temporal(MultiTemporalModel<T>& model, std::span<const LabeledEncoding> train,
                                             std::span<const LabeledEncoding> validation, const TrainConfig& cfg) {
  std::vector<NetworkLog> logs;
  for (int level : model.available_levels()) {
    for (StreamKind kind : {StreamKind::Spatial, StreamKind::Temporal}) {
      auto collect = [&](std::span<const LabeledEncoding> src) {
        std::vector<LabeledVolume> out;
        for (const auto& s : src) {
          const auto& slot = s.encoded->levels[static_cast<std::size_t>(level)];
          if (slot) out.push_back({&slot->get(kind), s.label});
        }
        return out;
      };
      const auto tr = collect(train);
      const auto va = collect(validation);
      TrainConfig net_cfg = cfg;
      net_cfg.seed = network_seed(cfg.seed, level, kind);
      auto& net = model.levels[static_cast<std::size_t>(level)]->get(kind);
      logs.push_back({level, kind, train_stream(net, tr, va, net_cfg)});
    }
  }
  return logs;
}

#define SKELVOL_INSTANTIATE_TWO_STREAM(T)                                                                         \
  template struct TwoStreamModel<T>;                                                                                \
  template struct MultiTemporalModel<T>;                                                                            \
  template TwoStreamModel<T> make_two_stream(const nn::StreamTopology&, std::uint64_t, int);                       \
  template MultiTemporalModel<T> make_multi_temporal(const nn::StreamTopology&, std::uint64_t, std::span<const int>); \
  template PipelineScores score_encoded(const EncodedSequence&, const MultiTemporalModel<T>&, std::span<const int>,  \
                                        LevelFusion);                                                               \
  template std::size_t run_pipeline(const SkeletonSequence&, const MultiTemporalModel<T>&, const PipelineConfig&);  \
  template double stream_accuracy(const nn::StreamNetwork<T>&, std::span<const LabeledVolume>);                     \
  template TrainLog train_stream(nn::StreamNetwork<T>&, std::span<const LabeledVolume>,                             \
                                 std::span<const LabeledVolume>, const TrainConfig&);                               \
  template std::vector<NetworkLog> train_multi_temporal(MultiTemporalModel<T>&, std::span<const LabeledEncoding>,   \
                                                        std::span<const LabeledEncoding>, const TrainConfig&);

SKELVOL_INSTANTIATE_TWO_STREAM(float)
SKELVOL_INSTANTIATE_TWO_STREAM(double)

#undef SKELVOL_INSTANTIATE_TWO_STREAM

}  // namespace skelvol

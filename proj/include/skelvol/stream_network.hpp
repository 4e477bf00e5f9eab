#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "skelvol/layers.hpp"
#include "skelvol/voxel.hpp"

namespace skelvol::nn {

struct ConvBlockSpec {
  std::size_t filters = 1;
  std::array<std::size_t, 3> kernel{3, 3, 3};  // (x, y, z)
  bool same_padding = true;

  friend bool operator==(const ConvBlockSpec&, const ConvBlockSpec&) = default;
};

/// Layer list of one stream: blocks of conv -> ReLU -> dropout -> max-pool,
/// then ReLU dense layers, then a linear output layer of `classes` logits.
struct StreamTopology {
  std::size_t input_resolution = kDefaultResolution;
  std::vector<ConvBlockSpec> blocks;
  std::size_t pool_window = 2;  // stride equals window
  std::vector<std::size_t> hidden;
  std::size_t classes = 2;
  double dropout = 0.3;

  /// 4 conv blocks with 3, 8, 32, 64 filters and kernels 7x7x5, 5x5x3,
  /// 5x5x3, 3x5x3; blocks 1-3 same-padded; dense 512 and 256.
  ///
  /// The fourth block is valid (unpadded) unless its input is too small for
  /// a valid convolution followed by one pooling window, in which case it is
  /// same-padded. At R = 50 it stays valid.
  static StreamTopology standard(std::size_t resolution, std::size_t classes, double dropout = 0.3);

  /// Spatial extents after each block's pooling; throws ShapeMismatch on a
  /// topology that does not fit its input.
  std::vector<std::array<std::size_t, 3>> pooled_extents() const;
  std::size_t flatten_size() const;
  void validate() const;

  friend bool operator==(const StreamTopology&, const StreamTopology&) = default;
};

/// One row of the parameter table, computed from the topology alone.
struct ParamRow {
  std::string layer;
  std::string shape;
  std::size_t count = 0;
};

/// Closed-form counts: conv out*(in*kx*ky*kz + 1), dense out*in + out.
std::vector<ParamRow> param_table(const StreamTopology& topology);
std::size_t param_count(const StreamTopology& topology);

/// Per-parameter gradient storage in StreamNetwork::parameters() order.
template <typename T>
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const std::vector<Shape>& shapes);

  void zero();
  void add(const GradientBuffer& other);
  void scale(T s);
  bool all_finite() const;

  std::vector<Tensor<T>>& tensors() { return tensors_; }
  const std::vector<Tensor<T>>& tensors() const { return tensors_; }
  std::vector<std::span<const T>> spans() const;

 private:
  std::vector<Tensor<T>> tensors_;
};

template <typename T>
class StreamNetwork {
 public:
  StreamNetwork() = default;
  /// Glorot-uniform weights from `init_seed`, zero biases.
  StreamNetwork(StreamTopology topology, std::uint64_t init_seed);

  const StreamTopology& topology() const noexcept { return topology_; }
  std::vector<Conv3dLayer<T>>& convs() noexcept { return convs_; }
  const std::vector<Conv3dLayer<T>>& convs() const noexcept { return convs_; }
  std::vector<DenseLayer<T>>& denses() noexcept { return denses_; }
  const std::vector<DenseLayer<T>>& denses() const noexcept { return denses_; }

  /// Weight, bias per conv then per dense layer.
  std::vector<std::span<T>> parameters();
  std::vector<std::span<const T>> parameters() const;
  /// Sum of allocated array lengths.
  std::size_t param_count() const;
  std::vector<Shape> parameter_shapes() const;
  GradientBuffer<T> make_gradients() const { return GradientBuffer<T>(parameter_shapes()); }

  /// (1, 1, R, R, R) tensor of the grid values; ShapeMismatch if R differs.
  Tensor<T> make_input(const VoxelGrid& grid) const;

  std::vector<T> logits(const Tensor<T>& input) const;
  ProbVector predict(const Tensor<T>& input) const;
  ProbVector predict(const VoxelGrid& grid) const { return predict(make_input(grid)); }

  struct SampleResult {
    double loss = 0.0;
    ProbVector probs;
  };

  /// Forward + backward for one sample; adds parameter gradients into
  /// `grads`. With training set, dropout masks come from `dropout_seed`.
  SampleResult backprop(const Tensor<T>& input, std::size_t target, bool training, std::uint64_t dropout_seed,
                        GradientBuffer<T>& grads) const;

  /// Forward-only loss with the same dropout semantics as backprop.
  double loss(const Tensor<T>& input, std::size_t target, bool training = false, std::uint64_t dropout_seed = 0) const;

  friend bool operator==(const StreamNetwork& a, const StreamNetwork& b) {
    return a.topology_ == b.topology_ && a.parameters_equal(b);
  }

 private:
  struct Cache;
  std::vector<T> forward(const Tensor<T>& input, bool training, std::uint64_t dropout_seed, Cache* cache) const;
  bool parameters_equal(const StreamNetwork& other) const;

  StreamTopology topology_;
  std::vector<Conv3dLayer<T>> convs_;
  std::vector<DenseLayer<T>> denses_;
};

template <typename T>
std::size_t param_count(const StreamNetwork<T>& net) {
  return net.param_count();
}

/// Versioned binary checkpoint: topology header then raw parameter arrays
/// (see docs/formats.md). Round trips are bit-exact.
template <typename T>
void save_checkpoint(std::ostream& out, const StreamNetwork<T>& net);

/// Throws VersionMismatch on unknown magic/version and IncompatibleCheckpoint
/// when the stored scalar width differs from T.
template <typename T>
StreamNetwork<T> load_checkpoint(std::istream& in);

template <typename T>
void save_checkpoint_file(const std::string& path, const StreamNetwork<T>& net);
template <typename T>
StreamNetwork<T> load_checkpoint_file(const std::string& path);

}  // namespace skelvol::nn

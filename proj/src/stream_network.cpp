#include "skelvol/stream_network.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "skelvol/binary_io.hpp"

namespace skelvol::nn {

// --- topology ------------------------------------------------------------------

StreamTopology StreamTopology::standard(std::size_t resolution, std::size_t classes, double dropout) {
  StreamTopology t;
  t.input_resolution = resolution;
  t.classes = classes;
  t.dropout = dropout;
  t.blocks = {{3, {7, 7, 5}, true}, {8, {5, 5, 3}, true}, {32, {5, 5, 3}, true}, {64, {3, 5, 3}, false}};
  t.hidden = {512, 256};

  std::size_t extent = resolution;
  for (int i = 0; i < 3; ++i) extent = extent >= t.pool_window ? (extent - t.pool_window) / t.pool_window + 1 : 0;
  auto& last = t.blocks.back();
  for (std::size_t k : last.kernel)
    if (extent < k + t.pool_window - 1) last.same_padding = true;
  t.validate();
  return t;
}

std::vector<std::array<std::size_t, 3>> StreamTopology::pooled_extents() const {
  if (input_resolution == 0) throw Error(ErrorCode::ShapeMismatch, "input resolution must be positive");
  if (pool_window == 0) throw Error(ErrorCode::ShapeMismatch, "pool window must be positive");
  std::vector<std::array<std::size_t, 3>> out;
  std::array<std::size_t, 3> e{input_resolution, input_resolution, input_resolution};
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& spec = blocks[b];
    for (int a = 0; a < 3; ++a) {
      if (spec.same_padding) {
        if (spec.kernel[a] % 2 == 0) throw Error(ErrorCode::ShapeMismatch, "same padding needs odd kernels");
      } else {
        if (e[a] < spec.kernel[a])
          throw Error(ErrorCode::ShapeMismatch, "block " + std::to_string(b + 1) + ": input extent " + std::to_string(e[a]) +
                                                    " smaller than kernel " + std::to_string(spec.kernel[a]));
        e[a] = e[a] - spec.kernel[a] + 1;
      }
      if (e[a] < pool_window)
        throw Error(ErrorCode::ShapeMismatch, "block " + std::to_string(b + 1) + ": extent " + std::to_string(e[a]) +
                                                  " smaller than pooling window");
      e[a] = (e[a] - pool_window) / pool_window + 1;
    }
    out.push_back(e);
  }
  return out;
}

std::size_t StreamTopology::flatten_size() const {
  const auto ext = pooled_extents();
  if (ext.empty()) return input_resolution * input_resolution * input_resolution;
  return blocks.back().filters * ext.back()[0] * ext.back()[1] * ext.back()[2];
}

void StreamTopology::validate() const {
  if (classes < 2) throw Error(ErrorCode::InvalidParams, "a stream needs at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidProbability, "dropout must be in [0, 1)");
  for (const auto& b : blocks)
    if (b.filters == 0) throw Error(ErrorCode::ShapeMismatch, "conv blocks need at least one filter");
  for (std::size_t h : hidden)
    if (h == 0) throw Error(ErrorCode::ShapeMismatch, "hidden layers need at least one unit");
  (void)pooled_extents();
}

std::vector<ParamRow> param_table(const StreamTopology& t) {
  t.validate();
  std::vector<ParamRow> rows;
  std::size_t in_ch = 1;
  for (std::size_t b = 0; b < t.blocks.size(); ++b) {
    const auto& s = t.blocks[b];
    const std::size_t kvol = s.kernel[0] * s.kernel[1] * s.kernel[2];
    rows.push_back({"conv" + std::to_string(b + 1),
                    std::to_string(s.filters) + "x" + std::to_string(in_ch) + "x" + std::to_string(s.kernel[0]) + "x" +
                        std::to_string(s.kernel[1]) + "x" + std::to_string(s.kernel[2]),
                    s.filters * (in_ch * kvol + 1)});
    in_ch = s.filters;
  }
  std::size_t in = t.flatten_size();
  std::vector<std::size_t> widths = t.hidden;
  widths.push_back(t.classes);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool out_layer = i + 1 == widths.size();
    rows.push_back({out_layer ? std::string("output") : "fc" + std::to_string(i + 1),
                    std::to_string(widths[i]) + "x" + std::to_string(in), widths[i] * in + widths[i]});
    in = widths[i];
  }
  return rows;
}

std::size_t param_count(const StreamTopology& topology) {
  std::size_t n = 0;
  for (const auto& r : param_table(topology)) n += r.count;
  return n;
}

// --- gradients -----------------------------------------------------------------

template <typename T>
GradientBuffer<T>::GradientBuffer(const std::vector<Shape>& shapes) {
  tensors_.reserve(shapes.size());
  for (const auto& s : shapes) tensors_.emplace_back(s);
}

template <typename T>
void GradientBuffer<T>::zero() {
  for (auto& t : tensors_) t.fill(T{0});
}

template <typename T>
void GradientBuffer<T>::add(const GradientBuffer& other) {
  if (other.tensors_.size() != tensors_.size()) throw Error(ErrorCode::ShapeMismatch, "gradient buffers differ in layout");
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (other.tensors_[i].size() != tensors_[i].size()) throw Error(ErrorCode::ShapeMismatch, "gradient buffers differ in layout");
    T* dst = tensors_[i].data();
    const T* src = other.tensors_[i].data();
    for (std::size_t j = 0; j < tensors_[i].size(); ++j) dst[j] += src[j];
  }
}

template <typename T>
void GradientBuffer<T>::scale(T s) {
  for (auto& t : tensors_)
    for (auto& v : t.storage()) v *= s;
}

template <typename T>
bool GradientBuffer<T>::all_finite() const {
  for (const auto& t : tensors_)
    if (!t.all_finite()) return false;
  return true;
}

template <typename T>
std::vector<std::span<const T>> GradientBuffer<T>::spans() const {
  std::vector<std::span<const T>> out;
  for (const auto& t : tensors_) out.push_back(t.span());
  return out;
}

// --- network -------------------------------------------------------------------

template <typename T>
StreamNetwork<T>::StreamNetwork(StreamTopology topology, std::uint64_t init_seed) : topology_(std::move(topology)) {
  topology_.validate();
  Rng rng(init_seed);
  auto init = [&](Tensor<T>& w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : w.storage()) v = static_cast<T>(uniform(rng, -limit, limit));
  };
  std::size_t in_ch = 1;
  for (const auto& spec : topology_.blocks) {
    Conv3dLayer<T> layer(in_ch, spec.filters, spec.kernel, spec.same_padding);
    const std::size_t kvol = spec.kernel[0] * spec.kernel[1] * spec.kernel[2];
    init(layer.weight, in_ch * kvol, spec.filters * kvol);
    convs_.push_back(std::move(layer));
    in_ch = spec.filters;
  }
  std::size_t in = topology_.flatten_size();
  std::vector<std::size_t> widths = topology_.hidden;
  widths.push_back(topology_.classes);
  for (std::size_t w : widths) {
    DenseLayer<T> layer(in, w);
    init(layer.weight, in, w);
    denses_.push_back(std::move(layer));
    in = w;
  }
}

template <typename T>
std::vector<std::span<T>> StreamNetwork<T>::parameters() {
  std::vector<std::span<T>> out;
  for (auto& c : convs_) {
    out.push_back(c.weight.span());
    out.push_back(c.bias.span());
  }
  for (auto& d : denses_) {
    out.push_back(d.weight.span());
    out.push_back(d.bias.span());
  }
  return out;
}

template <typename T>
std::vector<std::span<const T>> StreamNetwork<T>::parameters() const {
  std::vector<std::span<const T>> out;
  for (const auto& c : convs_) {
    out.push_back(c.weight.span());
    out.push_back(c.bias.span());
  }
  for (const auto& d : denses_) {
    out.push_back(d.weight.span());
    out.push_back(d.bias.span());
  }
  return out;
}

template <typename T>
std::vector<Shape> StreamNetwork<T>::parameter_shapes() const {
  std::vector<Shape> out;
  for (const auto& c : convs_) {
    out.push_back(c.weight.shape());
    out.push_back(c.bias.shape());
  }
  for (const auto& d : denses_) {
    out.push_back(d.weight.shape());
    out.push_back(d.bias.shape());
  }
  return out;
}

template <typename T>
std::size_t StreamNetwork<T>::param_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

template <typename T>
bool StreamNetwork<T>::parameters_equal(const StreamNetwork& other) const {
  const auto a = parameters();
  const auto b = other.parameters();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end())) return false;
  return true;
}

template <typename T>
Tensor<T> StreamNetwork<T>::make_input(const VoxelGrid& grid) const {
  const std::size_t R = topology_.input_resolution;
  if (grid.resolution != R)
    throw Error(ErrorCode::ShapeMismatch, "volume resolution " + std::to_string(grid.resolution) + " but network expects " +
                                              std::to_string(R));
  Tensor<T> x({1, 1, R, R, R});
  for (std::size_t i = 0; i < grid.values.size(); ++i) x[i] = static_cast<T>(grid.values[i]);
  return x;
}

template <typename T>
struct StreamNetwork<T>::Cache {
  struct Block {
    Tensor<T> input;
    Tensor<T> pre_activation;
    DropoutResult<T> dropped;
    PoolResult<T> pooled;
  };
  std::vector<Block> blocks;
  std::vector<Tensor<T>> dense_inputs;
  std::vector<Tensor<T>> dense_pre_activations;
};

template <typename T>
std::vector<T> StreamNetwork<T>::forward(const Tensor<T>& input, bool training, std::uint64_t dropout_seed,
                                         Cache* cache) const {
  const std::size_t R = topology_.input_resolution;
  if (input.shape() != Shape{1, 1, R, R, R})
    throw Error(ErrorCode::ShapeMismatch, "stream input " + shape_string(input.shape()) + " vs expected (1x1x" +
                                              std::to_string(R) + "x" + std::to_string(R) + "x" + std::to_string(R) + ")");
  Rng rng(dropout_seed);
  Tensor<T> x = input;
  for (const auto& conv : convs_) {
    Tensor<T> z = conv3d_forward(x, conv);
    DropoutResult<T> d = dropout(relu(z), topology_.dropout, rng, training);
    PoolResult<T> p = maxpool3d_forward(d.output, topology_.pool_window, topology_.pool_window);
    Tensor<T> next = p.output;
    if (cache) cache->blocks.push_back({std::move(x), std::move(z), std::move(d), std::move(p)});
    x = std::move(next);
  }
  Tensor<T> h = x.reshaped({1, x.size()});
  for (std::size_t i = 0; i < denses_.size(); ++i) {
    Tensor<T> z = dense_forward(h, denses_[i]);
    const bool last = i + 1 == denses_.size();
    Tensor<T> a = last ? z : relu(z);
    if (cache) {
      cache->dense_inputs.push_back(std::move(h));
      cache->dense_pre_activations.push_back(std::move(z));
    }
    h = std::move(a);
  }
  require_finite(h, "stream logits");
  return h.storage();
}

template <typename T>
std::vector<T> StreamNetwork<T>::logits(const Tensor<T>& input) const {
  return forward(input, false, 0, nullptr);
}

template <typename T>
ProbVector StreamNetwork<T>::predict(const Tensor<T>& input) const {
  const auto z = logits(input);
  return softmax<T>(z);
}

template <typename T>
double StreamNetwork<T>::loss(const Tensor<T>& input, std::size_t target, bool training, std::uint64_t dropout_seed) const {
  const auto z = forward(input, training, dropout_seed, nullptr);
  return softmax_cross_entropy<T>(z, target).loss;
}

template <typename T>
typename StreamNetwork<T>::SampleResult StreamNetwork<T>::backprop(const Tensor<T>& input, std::size_t target, bool training,
                                                                   std::uint64_t dropout_seed, GradientBuffer<T>& grads) const {
  Cache cache;
  const auto z = forward(input, training, dropout_seed, &cache);
  auto sl = softmax_cross_entropy<T>(z, target);

  auto& g = grads.tensors();
  if (g.size() != 2 * (convs_.size() + denses_.size())) throw Error(ErrorCode::ShapeMismatch, "gradient buffer layout mismatch");
  const std::size_t dense_base = 2 * convs_.size();

  Tensor<T> upstream({1, sl.grad_logits.size()}, sl.grad_logits);
  for (std::size_t i = denses_.size(); i-- > 0;) {
    if (i + 1 != denses_.size()) upstream = relu_backward(upstream, cache.dense_pre_activations[i]);
    Tensor<T> gin;
    dense_backward_accumulate(upstream, cache.dense_inputs[i], denses_[i], &gin, g[dense_base + 2 * i],
                              g[dense_base + 2 * i + 1]);
    upstream = std::move(gin);
  }

  if (!convs_.empty()) upstream = upstream.reshaped(cache.blocks.back().pooled.output.shape());
  for (std::size_t b = convs_.size(); b-- > 0;) {
    auto& blk = cache.blocks[b];
    Tensor<T> gd = maxpool3d_backward(upstream, blk.pooled);
    Tensor<T> ga = dropout_backward(gd, blk.dropped);
    Tensor<T> gz = relu_backward(ga, blk.pre_activation);
    Tensor<T> gin;
    conv3d_backward_accumulate(gz, blk.input, convs_[b], b > 0 ? &gin : nullptr, g[2 * b], g[2 * b + 1]);
    upstream = std::move(gin);
  }
  return {sl.loss, std::move(sl.probs)};
}

// --- checkpoints ---------------------------------------------------------------

namespace {
constexpr std::string_view kCheckpointMagic = "SKCK";
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kMaxListLength = 1u << 16;
}  // namespace

template <typename T>
void save_checkpoint(std::ostream& out, const StreamNetwork<T>& net) {
  using namespace binio;
  const auto& t = net.topology();
  put_magic(out, kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u8(out, static_cast<std::uint8_t>(sizeof(T)));
  put_u32(out, static_cast<std::uint32_t>(t.input_resolution));
  put_u32(out, static_cast<std::uint32_t>(t.blocks.size()));
  for (const auto& b : t.blocks) {
    put_u32(out, static_cast<std::uint32_t>(b.filters));
    for (std::size_t k : b.kernel) put_u32(out, static_cast<std::uint32_t>(k));
    put_u8(out, b.same_padding ? 1 : 0);
  }
  put_u32(out, static_cast<std::uint32_t>(t.pool_window));
  put_u32(out, static_cast<std::uint32_t>(t.hidden.size()));
  for (std::size_t h : t.hidden) put_u32(out, static_cast<std::uint32_t>(h));
  put_u32(out, static_cast<std::uint32_t>(t.classes));
  put_f64(out, t.dropout);
  const auto params = net.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_u32(out, static_cast<std::uint32_t>(p.size()));
    for (T v : p) put_real<T>(out, v);
  }
  if (!out) throw Error(ErrorCode::IoError, "checkpoint write failed");
}

template <typename T>
StreamNetwork<T> load_checkpoint(std::istream& in) {
  using namespace binio;
  expect_magic(in, kCheckpointMagic);
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion) throw Error(ErrorCode::VersionMismatch, "unsupported checkpoint version " + std::to_string(version));
  const std::uint8_t width = get_u8(in);
  if (width != sizeof(T))
    throw Error(ErrorCode::IncompatibleCheckpoint, "checkpoint stores " + std::to_string(8 * width) + "-bit parameters, expected " +
                                                       std::to_string(8 * sizeof(T)));
  StreamTopology t;
  t.input_resolution = get_u32(in);
  const std::uint32_t nblocks = get_u32(in);
  if (nblocks > kMaxListLength) throw Error(ErrorCode::IoError, "implausible block count");
  for (std::uint32_t i = 0; i < nblocks; ++i) {
    ConvBlockSpec b;
    b.filters = get_u32(in);
    for (auto& k : b.kernel) k = get_u32(in);
    b.same_padding = get_u8(in) != 0;
    t.blocks.push_back(b);
  }
  t.pool_window = get_u32(in);
  const std::uint32_t nhidden = get_u32(in);
  if (nhidden > kMaxListLength) throw Error(ErrorCode::IoError, "implausible hidden layer count");
  for (std::uint32_t i = 0; i < nhidden; ++i) t.hidden.push_back(get_u32(in));
  t.classes = get_u32(in);
  t.dropout = get_f64(in);

  StreamNetwork<T> net;
  try {
    net = StreamNetwork<T>(t, 0);
  } catch (const Error& e) {
    throw Error(ErrorCode::IoError, "checkpoint topology invalid: " + e.detail());
  }
  auto params = net.parameters();
  if (get_u32(in) != params.size()) throw Error(ErrorCode::IoError, "checkpoint parameter array count mismatch");
  for (auto& p : params) {
    if (get_u32(in) != p.size()) throw Error(ErrorCode::IoError, "checkpoint parameter array length mismatch");
    for (auto& v : p) v = get_real<T>(in);
  }
  return net;
}

template <typename T>
void save_checkpoint_file(const std::string& path, const StreamNetwork<T>& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, path + ": cannot open for writing");
  save_checkpoint(out, net);
}

template <typename T>
StreamNetwork<T> load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path + ": cannot open for reading");
  try {
    return load_checkpoint<T>(in);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

#define SKELVOL_INSTANTIATE_NETWORK(T)                                           \
  template class GradientBuffer<T>;                                              \
  template class StreamNetwork<T>;                                               \
  template void save_checkpoint(std::ostream&, const StreamNetwork<T>&);         \
  template StreamNetwork<T> load_checkpoint(std::istream&);                      \
  template void save_checkpoint_file(const std::string&, const StreamNetwork<T>&); \
  template StreamNetwork<T> load_checkpoint_file(const std::string&);

SKELVOL_INSTANTIATE_NETWORK(float)
SKELVOL_INSTANTIATE_NETWORK(double)

#undef SKELVOL_INSTANTIATE_NETWORK

}  // namespace skelvol::nn

#include "skelvol/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace skelvol::nn {

std::string shape_string(const Shape& shape) {
  std::ostringstream s;
  s << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) s << (i ? "x" : "") << shape[i];
  s << ')';
  return s.str();
}

namespace {

template <typename T>
inline void axpy(T* y, const T* x, T a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Fixed-order blocked reduction; vectorizes without reassociation.
template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
inline T sum(const T* a, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l];
  T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i];
  return s;
}

// Input density below which the convolution scatters from nonzero inputs
// instead of building column buffers. Voxelized skeletons sit far below it.
constexpr double kSparseDensity = 0.15;

struct ConvGeometry {
  std::size_t N, C, X, Y, Z;
  std::size_t O, KX, KY, KZ;
  std::size_t PX, PY, PZ;
  std::size_t OX, OY, OZ;

  std::size_t kernel_volume() const { return C * KX * KY * KZ; }
  std::size_t in_plane() const { return Y * Z; }
  std::size_t in_volume() const { return X * Y * Z; }
  std::size_t out_volume() const { return OX * OY * OZ; }
};

template <typename T>
ConvGeometry conv_geometry(const Shape& xs, const Conv3dLayer<T>& layer) {
  if (xs.size() != 5) throw Error(ErrorCode::ShapeMismatch, "conv3d expects a rank-5 input, got " + shape_string(xs));
  if (layer.weight.rank() != 5) throw Error(ErrorCode::ShapeMismatch, "conv3d weight must be rank 5");
  if (xs[1] != layer.in_channels())
    throw Error(ErrorCode::ShapeMismatch, "conv3d input has " + std::to_string(xs[1]) + " channels, layer expects " +
                                              std::to_string(layer.in_channels()));
  ConvGeometry g{};
  g.N = xs[0];
  g.C = xs[1];
  g.X = xs[2];
  g.Y = xs[3];
  g.Z = xs[4];
  g.O = layer.out_channels();
  const auto k = layer.kernel();
  g.KX = k[0];
  g.KY = k[1];
  g.KZ = k[2];
  const auto p = layer.padding();
  g.PX = p[0];
  g.PY = p[1];
  g.PZ = p[2];
  const auto o = layer.output_extents({g.X, g.Y, g.Z});
  g.OX = o[0];
  g.OY = o[1];
  g.OZ = o[2];
  return g;
}

// Column buffer for output plane ox of sample n: row k = (c, a, b, d) holds,
// for every (oy, oz), the input sample that kernel tap k multiplies.
template <typename T>
void fill_columns(const ConvGeometry& g, const T* x, std::size_t ox, T* cols) {
  const std::size_t tp = g.OY * g.OZ;
  T* row = cols;
  for (std::size_t c = 0; c < g.C; ++c)
    for (std::size_t a = 0; a < g.KX; ++a) {
      const long ix = static_cast<long>(ox + a) - static_cast<long>(g.PX);
      for (std::size_t b = 0; b < g.KY; ++b)
        for (std::size_t d = 0; d < g.KZ; ++d, row += tp) {
          if (ix < 0 || ix >= static_cast<long>(g.X)) {
            std::fill(row, row + tp, T{0});
            continue;
          }
          // Valid oz satisfy 0 <= oz + d - PZ < Z.
          const long shift = static_cast<long>(d) - static_cast<long>(g.PZ);
          const std::size_t oz_lo = static_cast<std::size_t>(std::max<long>(0, -shift));
          const std::size_t oz_hi = static_cast<std::size_t>(
              std::clamp<long>(static_cast<long>(g.Z) - shift, 0, static_cast<long>(g.OZ)));
          for (std::size_t oy = 0; oy < g.OY; ++oy) {
            T* dst = row + oy * g.OZ;
            const long iy = static_cast<long>(oy + b) - static_cast<long>(g.PY);
            if (iy < 0 || iy >= static_cast<long>(g.Y) || oz_lo >= oz_hi) {
              std::fill(dst, dst + g.OZ, T{0});
              continue;
            }
            const T* src = x + ((c * g.X + static_cast<std::size_t>(ix)) * g.Y + static_cast<std::size_t>(iy)) * g.Z;
            std::fill(dst, dst + oz_lo, T{0});
            for (std::size_t oz = oz_lo; oz < oz_hi; ++oz) dst[oz] = src[static_cast<long>(oz) + shift];
            std::fill(dst + oz_hi, dst + g.OZ, T{0});
          }
        }
    }
}

// Adjoint of fill_columns: adds column gradients back into the input gradient.
template <typename T>
void scatter_columns(const ConvGeometry& g, const T* cols, std::size_t ox, T* gx) {
  const std::size_t tp = g.OY * g.OZ;
  const T* row = cols;
  for (std::size_t c = 0; c < g.C; ++c)
    for (std::size_t a = 0; a < g.KX; ++a) {
      const long ix = static_cast<long>(ox + a) - static_cast<long>(g.PX);
      for (std::size_t b = 0; b < g.KY; ++b)
        for (std::size_t d = 0; d < g.KZ; ++d, row += tp) {
          if (ix < 0 || ix >= static_cast<long>(g.X)) continue;
          const long shift = static_cast<long>(d) - static_cast<long>(g.PZ);
          const std::size_t oz_lo = static_cast<std::size_t>(std::max<long>(0, -shift));
          const std::size_t oz_hi = static_cast<std::size_t>(
              std::clamp<long>(static_cast<long>(g.Z) - shift, 0, static_cast<long>(g.OZ)));
          for (std::size_t oy = 0; oy < g.OY; ++oy) {
            const long iy = static_cast<long>(oy + b) - static_cast<long>(g.PY);
            if (iy < 0 || iy >= static_cast<long>(g.Y)) continue;
            const T* src = row + oy * g.OZ;
            T* dst = gx + ((c * g.X + static_cast<std::size_t>(ix)) * g.Y + static_cast<std::size_t>(iy)) * g.Z;
            for (std::size_t oz = oz_lo; oz < oz_hi; ++oz) dst[static_cast<long>(oz) + shift] += src[oz];
          }
        }
    }
}

struct Nonzero {
  std::size_t c, ix, iy, iz;
};

// Nonzero positions of one sample when it is sparse enough, else empty with
// `sparse` false.
template <typename T>
bool collect_sparse(const ConvGeometry& g, const T* x, std::vector<Nonzero>& nz, std::vector<T>& vals) {
  const std::size_t total = g.C * g.in_volume();
  const std::size_t limit = static_cast<std::size_t>(kSparseDensity * static_cast<double>(total));
  nz.clear();
  vals.clear();
  for (std::size_t c = 0, idx = 0; c < g.C; ++c)
    for (std::size_t ix = 0; ix < g.X; ++ix)
      for (std::size_t iy = 0; iy < g.Y; ++iy)
        for (std::size_t iz = 0; iz < g.Z; ++iz, ++idx)
          if (x[idx] != T{0}) {
            if (nz.size() >= limit) return false;
            nz.push_back({c, ix, iy, iz});
            vals.push_back(x[idx]);
          }
  return true;
}

// Calls fn(tap_offset, out_offset) for every kernel tap that maps input
// position `p` onto a valid output position.
template <typename Fn>
inline void for_each_tap(const ConvGeometry& g, const Nonzero& p, Fn&& fn) {
  for (std::size_t a = 0; a < g.KX; ++a) {
    const long ox = static_cast<long>(p.ix + g.PX) - static_cast<long>(a);
    if (ox < 0 || ox >= static_cast<long>(g.OX)) continue;
    for (std::size_t b = 0; b < g.KY; ++b) {
      const long oy = static_cast<long>(p.iy + g.PY) - static_cast<long>(b);
      if (oy < 0 || oy >= static_cast<long>(g.OY)) continue;
      const std::size_t tap_row = ((p.c * g.KX + a) * g.KY + b) * g.KZ;
      const std::size_t out_row = (static_cast<std::size_t>(ox) * g.OY + static_cast<std::size_t>(oy)) * g.OZ;
      for (std::size_t d = 0; d < g.KZ; ++d) {
        const long oz = static_cast<long>(p.iz + g.PZ) - static_cast<long>(d);
        if (oz < 0 || oz >= static_cast<long>(g.OZ)) continue;
        fn(tap_row + d, out_row + static_cast<std::size_t>(oz));
      }
    }
  }
}

}  // namespace

// --- Conv3dLayer -------------------------------------------------------------

template <typename T>
Conv3dLayer<T>::Conv3dLayer(std::size_t in_channels, std::size_t out_channels, std::array<std::size_t, 3> kernel,
                            bool same)
    : weight({out_channels, in_channels, kernel[0], kernel[1], kernel[2]}), bias({out_channels}), same_padding(same) {
  if (in_channels == 0 || out_channels == 0 || kernel[0] == 0 || kernel[1] == 0 || kernel[2] == 0)
    throw Error(ErrorCode::ShapeMismatch, "conv3d extents must be positive");
  if (same && (kernel[0] % 2 == 0 || kernel[1] % 2 == 0 || kernel[2] % 2 == 0))
    throw Error(ErrorCode::ShapeMismatch, "same padding needs odd kernel extents");
}

template <typename T>
std::array<std::size_t, 3> Conv3dLayer<T>::padding() const {
  if (!same_padding) return {0, 0, 0};
  const auto k = kernel();
  return {(k[0] - 1) / 2, (k[1] - 1) / 2, (k[2] - 1) / 2};
}

template <typename T>
std::array<std::size_t, 3> Conv3dLayer<T>::output_extents(std::array<std::size_t, 3> in) const {
  if (same_padding) return in;
  const auto k = kernel();
  for (int a = 0; a < 3; ++a)
    if (in[a] < k[a])
      throw Error(ErrorCode::ShapeMismatch, "valid conv3d: input extent " + std::to_string(in[a]) + " < kernel extent " +
                                                std::to_string(k[a]) + " on axis " + std::to_string(a));
  return {in[0] - k[0] + 1, in[1] - k[1] + 1, in[2] - k[2] + 1};
}

// --- conv3d forward/backward -----------------------------------------------

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Conv3dLayer<T>& layer) {
  const ConvGeometry g = conv_geometry(x.shape(), layer);
  Tensor<T> out({g.N, g.O, g.OX, g.OY, g.OZ});
  const std::size_t K = g.kernel_volume();
  const std::size_t tp = g.OY * g.OZ;
  const T* w = layer.weight.data();
  std::vector<T> cols;
  std::vector<Nonzero> nz;
  std::vector<T> vals;

  for (std::size_t n = 0; n < g.N; ++n) {
    const T* xn = x.data() + n * g.C * g.in_volume();
    T* on = out.data() + n * g.O * g.out_volume();
    for (std::size_t oc = 0; oc < g.O; ++oc) std::fill(on + oc * g.out_volume(), on + (oc + 1) * g.out_volume(), layer.bias[oc]);

    if (collect_sparse(g, xn, nz, vals)) {
      for (std::size_t oc = 0; oc < g.O; ++oc) {
        const T* wo = w + oc * K;
        T* oo = on + oc * g.out_volume();
        for (std::size_t i = 0; i < nz.size(); ++i) {
          const T v = vals[i];
          for_each_tap(g, nz[i], [&](std::size_t tap, std::size_t o) { oo[o] += v * wo[tap]; });
        }
      }
      continue;
    }

    cols.resize(K * tp);
    for (std::size_t ox = 0; ox < g.OX; ++ox) {
      fill_columns(g, xn, ox, cols.data());
      for (std::size_t oc = 0; oc < g.O; ++oc) {
        T* tile = on + oc * g.out_volume() + ox * tp;
        const T* wo = w + oc * K;
        for (std::size_t k = 0; k < K; ++k) axpy(tile, cols.data() + k * tp, wo[k], tp);
      }
    }
  }
  return out;
}

template <typename T>
void conv3d_backward_accumulate(const Tensor<T>& grad_out, const Tensor<T>& x, const Conv3dLayer<T>& layer,
                                Tensor<T>* grad_input, Tensor<T>& grad_weight, Tensor<T>& grad_bias) {
  const ConvGeometry g = conv_geometry(x.shape(), layer);
  if (grad_out.shape() != Shape{g.N, g.O, g.OX, g.OY, g.OZ})
    throw Error(ErrorCode::ShapeMismatch, "conv3d grad_out shape " + shape_string(grad_out.shape()));
  if (grad_weight.shape() != layer.weight.shape() || grad_bias.shape() != layer.bias.shape())
    throw Error(ErrorCode::ShapeMismatch, "conv3d parameter gradient buffers have wrong shape");
  if (grad_input) *grad_input = Tensor<T>(x.shape());

  const std::size_t K = g.kernel_volume();
  const std::size_t tp = g.OY * g.OZ;
  const T* w = layer.weight.data();
  T* gw = grad_weight.data();
  std::vector<T> cols, gcols;
  std::vector<Nonzero> nz;
  std::vector<T> vals;

  for (std::size_t n = 0; n < g.N; ++n) {
    const T* xn = x.data() + n * g.C * g.in_volume();
    const T* gn = grad_out.data() + n * g.O * g.out_volume();
    for (std::size_t oc = 0; oc < g.O; ++oc) grad_bias[oc] += sum(gn + oc * g.out_volume(), g.out_volume());

    if (!grad_input && collect_sparse(g, xn, nz, vals)) {
      for (std::size_t oc = 0; oc < g.O; ++oc) {
        T* gwo = gw + oc * K;
        const T* go = gn + oc * g.out_volume();
        for (std::size_t i = 0; i < nz.size(); ++i) {
          const T v = vals[i];
          for_each_tap(g, nz[i], [&](std::size_t tap, std::size_t o) { gwo[tap] += v * go[o]; });
        }
      }
      continue;
    }

    cols.resize(K * tp);
    if (grad_input) gcols.resize(K * tp);
    T* gxn = grad_input ? grad_input->data() + n * g.C * g.in_volume() : nullptr;
    for (std::size_t ox = 0; ox < g.OX; ++ox) {
      fill_columns(g, xn, ox, cols.data());
      if (gxn) std::fill(gcols.begin(), gcols.end(), T{0});
      for (std::size_t oc = 0; oc < g.O; ++oc) {
        const T* tile = gn + oc * g.out_volume() + ox * tp;
        T* gwo = gw + oc * K;
        const T* wo = w + oc * K;
        for (std::size_t k = 0; k < K; ++k) {
          gwo[k] += dot(tile, cols.data() + k * tp, tp);
          if (gxn) axpy(gcols.data() + k * tp, tile, wo[k], tp);
        }
      }
      if (gxn) scatter_columns(g, gcols.data(), ox, gxn);
    }
  }
}

template <typename T>
Conv3dGrads<T> conv3d_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const Conv3dLayer<T>& layer,
                               bool need_input_grad) {
  Conv3dGrads<T> grads;
  grads.grad_weight = Tensor<T>(layer.weight.shape());
  grads.grad_bias = Tensor<T>(layer.bias.shape());
  conv3d_backward_accumulate(grad_out, x, layer, need_input_grad ? &grads.grad_input : nullptr, grads.grad_weight,
                             grads.grad_bias);
  return grads;
}

// --- max pooling ---------------------------------------------------------------

template <typename T>
PoolResult<T> maxpool3d_forward(const Tensor<T>& x, std::size_t window, std::size_t stride) {
  if (x.rank() != 5) throw Error(ErrorCode::ShapeMismatch, "maxpool3d expects a rank-5 input, got " + shape_string(x.shape()));
  if (window == 0 || stride == 0) throw Error(ErrorCode::ShapeMismatch, "maxpool3d window and stride must be positive");
  const auto& s = x.shape();
  for (int a = 2; a < 5; ++a)
    if (s[a] < window)
      throw Error(ErrorCode::ShapeMismatch, "maxpool3d input extent " + std::to_string(s[a]) + " < window " + std::to_string(window));
  const std::size_t X = s[2], Y = s[3], Z = s[4];
  const std::size_t OX = (X - window) / stride + 1, OY = (Y - window) / stride + 1, OZ = (Z - window) / stride + 1;

  PoolResult<T> r;
  r.input_shape = s;
  r.output = Tensor<T>({s[0], s[1], OX, OY, OZ});
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < s[0] * s[1]; ++nc) {
    const std::size_t base = nc * X * Y * Z;
    for (std::size_t ox = 0; ox < OX; ++ox)
      for (std::size_t oy = 0; oy < OY; ++oy)
        for (std::size_t oz = 0; oz < OZ; ++oz, ++o) {
          std::size_t best = base + ((ox * stride) * Y + oy * stride) * Z + oz * stride;
          T best_v = x[best];
          for (std::size_t a = 0; a < window; ++a)
            for (std::size_t b = 0; b < window; ++b)
              for (std::size_t c = 0; c < window; ++c) {
                const std::size_t idx = base + ((ox * stride + a) * Y + oy * stride + b) * Z + oz * stride + c;
                if (x[idx] > best_v) {
                  best_v = x[idx];
                  best = idx;
                }
              }
          r.output[o] = best_v;
          r.argmax[o] = best;
        }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool3d_backward(const Tensor<T>& grad_out, const PoolResult<T>& forward) {
  if (grad_out.shape() != forward.output.shape() || forward.argmax.size() != grad_out.size())
    throw Error(ErrorCode::ShapeMismatch, "maxpool3d grad_out does not match forward output");
  Tensor<T> gx(forward.input_shape);
  for (std::size_t o = 0; o < grad_out.size(); ++o) gx[forward.argmax[o]] += grad_out[o];
  return gx;
}

// --- elementwise -----------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.storage()) v = v > T{0} ? v : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
  if (grad_out.shape() != x.shape()) throw Error(ErrorCode::ShapeMismatch, "relu_backward shape mismatch");
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(x[i] > T{0})) g[i] = T{0};
  return g;
}

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& x, double p, Rng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidProbability, "dropout probability must be in [0, 1)");
  DropoutResult<T> r;
  r.output = x;
  if (!training || p == 0.0) return r;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  r.scale.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.scale[i] = uniform01(rng) < p ? T{0} : keep_scale;
    r.output[i] *= r.scale[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& grad_out, const DropoutResult<T>& forward) {
  if (grad_out.shape() != forward.output.shape()) throw Error(ErrorCode::ShapeMismatch, "dropout_backward shape mismatch");
  if (forward.scale.empty()) return grad_out;
  Tensor<T> g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= forward.scale[i];
  return g;
}

// --- dense ---------------------------------------------------------------------

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const DenseLayer<T>& layer) {
  if (x.rank() != 2 || x.extent(1) != layer.in_features())
    throw Error(ErrorCode::ShapeMismatch, "dense input " + shape_string(x.shape()) + " vs layer input " +
                                              std::to_string(layer.in_features()));
  const std::size_t N = x.extent(0), I = layer.in_features(), O = layer.out_features();
  Tensor<T> y({N, O});
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t o = 0; o < O; ++o)
      y[n * O + o] = layer.bias[o] + dot(layer.weight.data() + o * I, x.data() + n * I, I);
  return y;
}

template <typename T>
void dense_backward_accumulate(const Tensor<T>& grad_out, const Tensor<T>& x, const DenseLayer<T>& layer,
                               Tensor<T>* grad_input, Tensor<T>& grad_weight, Tensor<T>& grad_bias) {
  const std::size_t I = layer.in_features(), O = layer.out_features();
  if (x.rank() != 2 || x.extent(1) != I || grad_out.shape() != Shape{x.extent(0), O})
    throw Error(ErrorCode::ShapeMismatch, "dense_backward shapes inconsistent with forward");
  if (grad_weight.shape() != layer.weight.shape() || grad_bias.shape() != layer.bias.shape())
    throw Error(ErrorCode::ShapeMismatch, "dense parameter gradient buffers have wrong shape");
  const std::size_t N = x.extent(0);
  if (grad_input) *grad_input = Tensor<T>(x.shape());
  for (std::size_t n = 0; n < N; ++n) {
    const T* xn = x.data() + n * I;
    const T* gn = grad_out.data() + n * O;
    for (std::size_t o = 0; o < O; ++o) {
      grad_bias[o] += gn[o];
      axpy(grad_weight.data() + o * I, xn, gn[o], I);
      if (grad_input) axpy(grad_input->data() + n * I, layer.weight.data() + o * I, gn[o], I);
    }
  }
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& grad_out, const Tensor<T>& x, const DenseLayer<T>& layer) {
  DenseGrads<T> g;
  g.grad_weight = Tensor<T>(layer.weight.shape());
  g.grad_bias = Tensor<T>(layer.bias.shape());
  dense_backward_accumulate(grad_out, x, layer, &g.grad_input, g.grad_weight, g.grad_bias);
  return g;
}

// --- softmax -------------------------------------------------------------------

template <typename T>
ProbVector softmax(std::span<const T> logits) {
  if (logits.empty()) throw Error(ErrorCode::ShapeMismatch, "softmax of empty vector");
  const double shift = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  ProbVector p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (p[i] = std::exp(static_cast<double>(logits[i]) - shift));
  for (auto& v : p) v /= z;
  return p;
}

template <typename T>
SoftmaxLoss<T> softmax_cross_entropy(std::span<const T> logits, std::size_t target) {
  if (logits.size() < 2) throw Error(ErrorCode::InvalidParams, "softmax cross-entropy needs at least 2 classes");
  if (target >= logits.size())
    throw Error(ErrorCode::InvalidTarget, "target " + std::to_string(target) + " out of range for " + std::to_string(logits.size()) + " classes");
  for (T v : logits)
    if (!std::isfinite(v)) throw Error(ErrorCode::NumericError, "non-finite logit");
  SoftmaxLoss<T> r;
  r.probs = softmax(logits);
  // log-sum-exp form keeps the loss finite even when probs[target] underflows.
  const double shift = static_cast<double>(*std::max_element(logits.begin(), logits.end()));
  double z = 0.0;
  for (T v : logits) z += std::exp(static_cast<double>(v) - shift);
  r.loss = std::log(z) + shift - static_cast<double>(logits[target]);
  r.grad_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i)
    r.grad_logits[i] = static_cast<T>(r.probs[i] - (i == target ? 1.0 : 0.0));
  return r;
}

#define SKELVOL_INSTANTIATE_LAYERS(T)                                                                                 \
  template struct Conv3dLayer<T>;                                                                                      \
  template Tensor<T> conv3d_forward(const Tensor<T>&, const Conv3dLayer<T>&);                                          \
  template Conv3dGrads<T> conv3d_backward(const Tensor<T>&, const Tensor<T>&, const Conv3dLayer<T>&, bool);           \
  template void conv3d_backward_accumulate(const Tensor<T>&, const Tensor<T>&, const Conv3dLayer<T>&, Tensor<T>*,     \
                                           Tensor<T>&, Tensor<T>&);                                                    \
  template PoolResult<T> maxpool3d_forward(const Tensor<T>&, std::size_t, std::size_t);                                \
  template Tensor<T> maxpool3d_backward(const Tensor<T>&, const PoolResult<T>&);                                       \
  template Tensor<T> relu(const Tensor<T>&);                                                                           \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                                                \
  template DropoutResult<T> dropout(const Tensor<T>&, double, Rng&, bool);                                             \
  template Tensor<T> dropout_backward(const Tensor<T>&, const DropoutResult<T>&);                                      \
  template Tensor<T> dense_forward(const Tensor<T>&, const DenseLayer<T>&);                                            \
  template DenseGrads<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const DenseLayer<T>&);                     \
  template void dense_backward_accumulate(const Tensor<T>&, const Tensor<T>&, const DenseLayer<T>&, Tensor<T>*,       \
                                          Tensor<T>&, Tensor<T>&);                                                     \
  template ProbVector softmax(std::span<const T>);                                                                     \
  template SoftmaxLoss<T> softmax_cross_entropy(std::span<const T>, std::size_t);

SKELVOL_INSTANTIATE_LAYERS(float)
SKELVOL_INSTANTIATE_LAYERS(double)

#undef SKELVOL_INSTANTIATE_LAYERS

}  // namespace skelvol::nn

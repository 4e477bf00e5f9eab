#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "skelvol/error.hpp"

namespace skelvol::nn {

struct SgdConfig {
  double learning_rate = 0.0005;
  double momentum = 0.9;
  double weight_decay = 1e-6;
};

/// One momentum step for a single parameter array:
///   g' = g + wd * w;  v = momentum * v + g';  w -= lr * v
template <typename T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, const SgdConfig& cfg) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw Error(ErrorCode::ShapeMismatch, "sgd_step: parameter, gradient and velocity lengths differ");
  const T lr = static_cast<T>(cfg.learning_rate);
  const T mu = static_cast<T>(cfg.momentum);
  const T wd = static_cast<T>(cfg.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i] + wd * params[i];
    velocity[i] = mu * velocity[i] + g;
    params[i] -= lr * velocity[i];
  }
}

/// Velocity buffers mirroring a fixed list of parameter arrays.
template <typename T>
class SgdOptimizer {
 public:
  SgdOptimizer() = default;
  SgdOptimizer(const std::vector<std::span<T>>& params, SgdConfig cfg) : cfg_(cfg) {
    velocity_.reserve(params.size());
    for (const auto& p : params) velocity_.emplace_back(p.size(), T{0});
  }

  const SgdConfig& config() const noexcept { return cfg_; }
  const std::vector<std::vector<T>>& velocity() const noexcept { return velocity_; }

  void step(const std::vector<std::span<T>>& params, const std::vector<std::span<const T>>& grads) {
    if (params.size() != velocity_.size() || grads.size() != velocity_.size())
      throw Error(ErrorCode::ShapeMismatch, "optimizer parameter list changed shape");
    for (std::size_t i = 0; i < params.size(); ++i) sgd_step<T>(params[i], grads[i], velocity_[i], cfg_);
  }

 private:
  SgdConfig cfg_;
  std::vector<std::vector<T>> velocity_;
};

}  // namespace skelvol::nn

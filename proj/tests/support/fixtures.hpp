#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "skelvol/rng.hpp"
#include "skelvol/skeleton.hpp"

namespace skelvol::testing {

/// Random joints in a 2 m box; every frame distinct.
inline SkeletonSequence random_sequence(std::size_t frames, std::uint64_t seed) {
  Rng rng(seed);
  SkeletonSequence seq;
  for (std::size_t f = 0; f < frames; ++f) {
    SkeletonFrame fr;
    fr.frame_index = static_cast<int>(f + 1);
    for (std::size_t j = 0; j < kJointCount; ++j) fr.joints.push_back({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 2, 4)});
    seq.frames.push_back(fr);
  }
  return seq;
}

/// Upright figure with hips along +x and spine along +y, SpineBase at
/// `origin`.
inline SkeletonFrame upright_frame(Vec3 origin = {}) {
  SkeletonFrame f;
  f.joints.assign(kJointCount, origin);
  for (std::size_t j = 0; j < kJointCount; ++j)
    f.joints[j] = origin + Vec3{0.01 * static_cast<double>(j % 5), 0.05 * static_cast<double>(j), 0.02 * static_cast<double>(j % 3)};
  f(joint::SpineBase) = origin;
  f(joint::SpineMid) = origin + Vec3{0.0, 0.3, 0.0};
  f(joint::HipLeft) = origin + Vec3{-0.1, 0.0, 0.0};
  f(joint::HipRight) = origin + Vec3{0.1, 0.0, 0.0};
  return f;
}

struct NtuBody {
  std::uint64_t id = 1;
  std::vector<Vec3> joints;  // usually 25
};

/// Text in the NTU skeleton layout; each inner vector is one frame.
inline std::string ntu_text(const std::vector<std::vector<NtuBody>>& frames) {
  std::ostringstream out;
  out.precision(17);
  out << frames.size() << "\n";
  for (const auto& bodies : frames) {
    out << bodies.size() << "\n";
    for (const auto& b : bodies) {
      out << b.id << " 0 1 1 1 1 0 0.01 -0.02 2\n" << b.joints.size() << "\n";
      for (const auto& j : b.joints) out << j.x << ' ' << j.y << ' ' << j.z << " 100 200 300 400 0 0 0 1 2\n";
    }
  }
  return out.str();
}

inline NtuBody ntu_body(std::uint64_t id, double base) {
  NtuBody b;
  b.id = id;
  for (std::size_t j = 0; j < kJointCount; ++j) b.joints.push_back({base + 0.01 * static_cast<double>(j), base, base + 1});
  return b;
}

}  // namespace skelvol::testing

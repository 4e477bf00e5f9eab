#include "skelvol/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "skelvol/error.hpp"

namespace skelvol {

void validate(const SkeletonSequence& seq) {
  if (seq.frames.empty()) throw Error(ErrorCode::InvalidParams, "sequence has no frames");
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    if (frame.joints.size() != kJointCount)
      throw Error(ErrorCode::InvalidParams, "frame " + std::to_string(f + 1) + " has " +
                                                std::to_string(frame.joints.size()) + " joints");
    if (frame.frame_index != static_cast<int>(f + 1))
      throw Error(ErrorCode::InvalidParams, "frame indices are not 1..F in order");
    for (const auto& j : frame.joints)
      if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.z))
        throw Error(ErrorCode::InvalidParams, "non-finite joint coordinate");
  }
}

void resequence(SkeletonSequence& seq) {
  for (std::size_t f = 0; f < seq.frames.size(); ++f) seq.frames[f].frame_index = static_cast<int>(f + 1);
}

SkeletonSequence reversed(const SkeletonSequence& seq) {
  SkeletonSequence out = seq;
  std::reverse(out.frames.begin(), out.frames.end());
  resequence(out);
  return out;
}

}  // namespace skelvol

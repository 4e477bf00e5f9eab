#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skelvol/skeleton.hpp"

namespace skelvol {

enum class MotionKind { RaiseArm, WaveHand, SitDown, StandUp, Circle, Box };

const std::vector<MotionKind>& all_motion_kinds();
std::string_view to_string(MotionKind kind);
MotionKind parse_motion_kind(std::string_view name);

/// 25-joint synthetic performer. The pelvis, spine and head are rigid and
/// stay put; only limbs move. Per-seed variation covers body scale, motion
/// amplitude and timing, acting hand, yaw and world offset.
///
/// StandUp is the frame reversal of SitDown with the same seed. Gaussian
/// noise of `noise_sigma` metres is added to every coordinate afterwards.
/// Throws InvalidParams for frames < 4 or a negative or non-finite sigma.
SkeletonSequence gen_synthetic(MotionKind kind, std::size_t frames, double noise_sigma, std::uint64_t seed);

/// `first` over frames 1..F/2 and `second` over the rest, sharing one
/// performer.
SkeletonSequence gen_composite(MotionKind first, MotionKind second, std::size_t frames, double noise_sigma,
                               std::uint64_t seed);

}  // namespace skelvol

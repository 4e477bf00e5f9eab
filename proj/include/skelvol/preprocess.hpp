#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "skelvol/geometry.hpp"
#include "skelvol/skeleton.hpp"

namespace skelvol {

struct RigidTransform {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform inverse() const;
};

/// Parent/child pairs over 1-based NTU joint ids. 24 edges forming a tree
/// rooted at SpineBase.
using BoneEdge = std::pair<int, int>;
inline constexpr std::size_t kBoneCount = kJointCount - 1;
const std::array<BoneEdge, kBoneCount>& ntu_bone_graph();

/// Per-frame point sets after skeleton densification.
struct PointCloudSequence {
  std::vector<std::vector<Vec3>> frames;

  std::size_t frame_count() const noexcept { return frames.size(); }
  std::size_t point_count() const noexcept;
};

/// Translates every frame so its SpineBase joint sits at the origin.
SkeletonSequence center_on_hip(const SkeletonSequence& seq);

struct ViewNormalization {
  SkeletonSequence sequence;
  RigidTransform transform;
  bool degenerate = false;  // identity was substituted
};

/// Rotation that takes the first frame's HipLeft->HipRight vector to +x and
/// the component of its SpineBase->SpineMid vector orthogonal to that axis
/// to +y. The same rotation is applied to all frames. Expects hip-centered
/// input. Hips closer than 1e-6 m (or a spine parallel to them) fall back to
/// the identity and set `degenerate`.
ViewNormalization view_normalize(const SkeletonSequence& seq);

/// The rotation view_normalize would compute for a single frame; nullopt on
/// degenerate geometry.
std::optional<Mat3> view_rotation(const SkeletonFrame& frame);

/// Keeps the 25 joints and adds `points_per_bone` evenly spaced points
/// strictly inside each bone (t = i/(k+1)). Ordering: joints 1..25, then
/// per edge in ntu_bone_graph() order, parent to child.
PointCloudSequence interpolate_bones(const SkeletonSequence& seq, std::size_t points_per_bone);

/// Temporal levels: 0 whole sequence, 1 first half, 2 middle half, 3 second
/// half (frame bounds use floor, clamped to >= 1). Levels 1-3 need F >= 4
/// (SequenceTooShort otherwise); level outside 0..3 is InvalidParams.
SkeletonSequence temporal_subsequence(const SkeletonSequence& seq, int level);

/// Inclusive 1-based [first, last] frame range for a level.
std::pair<std::size_t, std::size_t> level_frame_range(std::size_t frame_count, int level);

}  // namespace skelvol

#include "skelvol/preprocess.hpp"

#include <algorithm>
#include <optional>

#include "skelvol/error.hpp"

namespace skelvol {

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transposed();
  const Vec3 t = inv.rotation * translation;
  inv.translation = {-t.x, -t.y, -t.z};
  return inv;
}

const std::array<BoneEdge, kBoneCount>& ntu_bone_graph() {
  using namespace joint;
  static const std::array<BoneEdge, kBoneCount> edges = {{
      {SpineBase, SpineMid},       {SpineMid, SpineShoulder},    {SpineShoulder, Neck},     {Neck, Head},
      {SpineShoulder, ShoulderLeft}, {ShoulderLeft, ElbowLeft},   {ElbowLeft, WristLeft},    {WristLeft, HandLeft},
      {HandLeft, HandTipLeft},     {WristLeft, ThumbLeft},       {SpineShoulder, ShoulderRight},
      {ShoulderRight, ElbowRight}, {ElbowRight, WristRight},     {WristRight, HandRight},   {HandRight, HandTipRight},
      {WristRight, ThumbRight},    {SpineBase, HipLeft},         {HipLeft, KneeLeft},       {KneeLeft, AnkleLeft},
      {AnkleLeft, FootLeft},       {SpineBase, HipRight},        {HipRight, KneeRight},     {KneeRight, AnkleRight},
      {AnkleRight, FootRight},
  }};
  return edges;
}

std::size_t PointCloudSequence::point_count() const noexcept {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.size();
  return n;
}

SkeletonSequence center_on_hip(const SkeletonSequence& seq) {
  SkeletonSequence out = seq;
  for (auto& frame : out.frames) {
    const Vec3 origin = frame(joint::SpineBase);
    for (auto& j : frame.joints) j = j - origin;
  }
  return out;
}

std::optional<Mat3> view_rotation(const SkeletonFrame& frame) {
  const Vec3 hip_axis = frame(joint::HipRight) - frame(joint::HipLeft);
  const double hip_len = norm(hip_axis);
  if (hip_len < 1e-6) return std::nullopt;
  const Vec3 ex = (1.0 / hip_len) * hip_axis;

  const Vec3 spine = frame(joint::SpineMid) - frame(joint::SpineBase);
  const Vec3 spine_perp = spine - dot(spine, ex) * ex;
  const double perp_len = norm(spine_perp);
  if (perp_len < 1e-6) return std::nullopt;
  const Vec3 ey = (1.0 / perp_len) * spine_perp;
  const Vec3 ez = cross(ex, ey);
  // Rows are the new axes expressed in the old frame.
  return Mat3::from_rows(ex, ey, ez);
}

ViewNormalization view_normalize(const SkeletonSequence& seq) {
  if (seq.frames.empty()) throw Error(ErrorCode::EmptySequence, "view_normalize on empty sequence");
  ViewNormalization result;
  auto rotation = view_rotation(seq.frames.front());
  result.degenerate = !rotation.has_value();
  result.transform.rotation = rotation.value_or(Mat3::identity());
  result.sequence = seq;
  if (!result.degenerate)
    for (auto& frame : result.sequence.frames)
      for (auto& j : frame.joints) j = result.transform.apply(j);
  return result;
}

PointCloudSequence interpolate_bones(const SkeletonSequence& seq, std::size_t points_per_bone) {
  PointCloudSequence out;
  out.frames.reserve(seq.frames.size());
  const auto& edges = ntu_bone_graph();
  for (const auto& frame : seq.frames) {
    std::vector<Vec3> pts;
    pts.reserve(kJointCount + kBoneCount * points_per_bone);
    pts.insert(pts.end(), frame.joints.begin(), frame.joints.end());
    for (const auto& [parent, child] : edges) {
      const Vec3& a = frame(parent);
      const Vec3& b = frame(child);
      for (std::size_t i = 1; i <= points_per_bone; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points_per_bone + 1);
        pts.push_back(a + t * (b - a));
      }
    }
    out.frames.push_back(std::move(pts));
  }
  return out;
}

std::pair<std::size_t, std::size_t> level_frame_range(std::size_t frame_count, int level) {
  if (level < 0 || level > 3) throw Error(ErrorCode::InvalidParams, "temporal level must be in 0..3, got " + std::to_string(level));
  const std::size_t F = frame_count;
  if (level == 0) return {1, F};
  if (F < 4) throw Error(ErrorCode::SequenceTooShort, "levels 1-3 need at least 4 frames, got " + std::to_string(F));
  auto clamp1 = [](std::size_t v) { return std::max<std::size_t>(v, 1); };
  switch (level) {
    case 1: return {1, clamp1(F / 2)};
    case 2: return {clamp1(F / 4), clamp1(3 * F / 4)};
    default: return {clamp1(F / 2), F};
  }
}

SkeletonSequence temporal_subsequence(const SkeletonSequence& seq, int level) {
  const auto [first, last] = level_frame_range(seq.frames.size(), level);
  SkeletonSequence out = seq;
  out.frames.assign(seq.frames.begin() + static_cast<std::ptrdiff_t>(first - 1),
                    seq.frames.begin() + static_cast<std::ptrdiff_t>(last));
  resequence(out);
  return out;
}

}  // namespace skelvol

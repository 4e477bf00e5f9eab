#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skelvol/geometry.hpp"

namespace skelvol {

/// Joints per body in the NTU RGB+D (Kinect v2) configuration.
inline constexpr std::size_t kJointCount = 25;

/// 1-based NTU joint ids.
namespace joint {
inline constexpr int SpineBase = 1;
inline constexpr int SpineMid = 2;
inline constexpr int Neck = 3;
inline constexpr int Head = 4;
inline constexpr int ShoulderLeft = 5;
inline constexpr int ElbowLeft = 6;
inline constexpr int WristLeft = 7;
inline constexpr int HandLeft = 8;
inline constexpr int ShoulderRight = 9;
inline constexpr int ElbowRight = 10;
inline constexpr int WristRight = 11;
inline constexpr int HandRight = 12;
inline constexpr int HipLeft = 13;
inline constexpr int KneeLeft = 14;
inline constexpr int AnkleLeft = 15;
inline constexpr int FootLeft = 16;
inline constexpr int HipRight = 17;
inline constexpr int KneeRight = 18;
inline constexpr int AnkleRight = 19;
inline constexpr int FootRight = 20;
inline constexpr int SpineShoulder = 21;
inline constexpr int HandTipLeft = 22;
inline constexpr int ThumbLeft = 23;
inline constexpr int HandTipRight = 24;
inline constexpr int ThumbRight = 25;
}  // namespace joint

using Joint = Vec3;

struct SkeletonFrame {
  std::vector<Joint> joints;  // exactly kJointCount entries
  int frame_index = 1;        // 1-based

  /// Access by 1-based NTU joint id.
  const Joint& operator()(int joint_id) const { return joints[static_cast<std::size_t>(joint_id - 1)]; }
  Joint& operator()(int joint_id) { return joints[static_cast<std::size_t>(joint_id - 1)]; }

  friend bool operator==(const SkeletonFrame&, const SkeletonFrame&) = default;
};

struct SkeletonSequence {
  std::vector<SkeletonFrame> frames;
  std::optional<int> label;
  std::optional<int> subject_id;
  std::optional<int> camera_id;
  std::optional<std::string> source_path;

  std::size_t frame_count() const noexcept { return frames.size(); }

  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;
};

/// Throws InvalidParams unless every frame has kJointCount finite joints and
/// frame indices run 1..F.
void validate(const SkeletonSequence& seq);

/// Renumbers frame indices to 1..F in current order.
void resequence(SkeletonSequence& seq);

/// Frame order reversed, indices resequenced, metadata kept.
SkeletonSequence reversed(const SkeletonSequence& seq);

}  // namespace skelvol

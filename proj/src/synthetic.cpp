#include "skelvol/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "skelvol/error.hpp"
#include "skelvol/rng.hpp"

namespace skelvol {

namespace {

constexpr double kPi = std::numbers::pi;

struct Performer {
  double scale = 1.0;
  double amplitude = 1.0;
  double onset = 0.0;   // motion starts at this fraction of the clip
  double offset_end = 1.0;
  double side = 1.0;    // +1 right hand, -1 left hand
  double yaw = 0.0;
  Vec3 origin;
};

Performer draw_performer(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5EED));
  Performer p;
  p.scale = uniform(rng, 0.9, 1.1);
  p.amplitude = uniform(rng, 0.85, 1.0);
  p.onset = uniform(rng, 0.0, 0.1);
  p.offset_end = uniform(rng, 0.9, 1.0);
  p.side = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  p.yaw = uniform(rng, -0.3, 0.3);
  p.origin = {uniform(rng, -0.5, 0.5), uniform(rng, 0.6, 1.0), uniform(rng, 2.5, 3.5)};
  return p;
}

Vec3 normalized(Vec3 v) { return (1.0 / norm(v)) * v; }

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

struct Limb {
  Vec3 upper;
  Vec3 lower;
};

Limb rest_arm(double side) { return {normalized({side * 0.12, -1.0, 0.05}), normalized({side * 0.08, -1.0, 0.15})}; }

Limb straight(Vec3 d) { return {d, d}; }

struct Pose {
  Limb left_arm, right_arm;
  double hip_flex = 0.0, knee_flex = 0.0;
};

Pose pose_at(MotionKind kind, double t, const Performer& p) {
  Pose pose{rest_arm(-1.0), rest_arm(1.0)};
  Limb& active = p.side > 0 ? pose.right_arm : pose.left_arm;
  const double s_side = p.side;
  const double u = std::clamp((t - p.onset) / (p.offset_end - p.onset), 0.0, 1.0);
  const double s = smoothstep(u);
  switch (kind) {
    case MotionKind::RaiseArm: {
      const double a = p.amplitude * kPi * (17.0 / 18.0) * s;
      active = straight(normalized({s_side * 0.1 * (1.0 - s), -std::cos(a), std::sin(a)}));
      break;
    }
    case MotionKind::WaveHand: {
      const double r = smoothstep(std::min(1.0, 4.0 * u));
      const double b = r * p.amplitude * kPi * (4.0 / 9.0);
      const double e = r * (kPi + 0.5 * std::sin(2.0 * kPi * 3.0 * u));
      active = {normalized({s_side * std::sin(b), -std::cos(b), 0.05}), normalized({s_side * std::sin(e), -std::cos(e), 0.05})};
      break;
    }
    case MotionKind::SitDown:
    case MotionKind::StandUp: {
      pose.hip_flex = pose.knee_flex = p.amplitude * (kPi / 2.0) * s;
      const double a = (35.0 / 180.0) * kPi * s;
      pose.left_arm = straight(normalized({-0.1, -std::cos(a), std::sin(a)}));
      pose.right_arm = straight(normalized({0.1, -std::cos(a), std::sin(a)}));
      break;
    }
    case MotionKind::Circle: {
      const double r = 0.5 * p.amplitude;
      const double th = 2.0 * kPi * u;
      active = straight(normalized({s_side * r * std::cos(th), r * std::sin(th), 1.0}));
      break;
    }
    case MotionKind::Box: {
      static constexpr std::array<std::array<double, 2>, 5> corners{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}, {1, 1}}};
      const double q = 4.0 * u;
      const auto seg = std::min<std::size_t>(3, static_cast<std::size_t>(q));
      const double w = q - static_cast<double>(seg);
      const double px = corners[seg][0] + w * (corners[seg + 1][0] - corners[seg][0]);
      const double py = corners[seg][1] + w * (corners[seg + 1][1] - corners[seg][1]);
      const double r = 0.4 * p.amplitude;
      active = straight(normalized({s_side * r * px, r * py, 1.0}));
      break;
    }
  }
  return pose;
}

void place_arm(SkeletonFrame& f, const Limb& arm, double side, double sc) {
  const bool right = side > 0;
  const Vec3 shoulder = f(right ? joint::ShoulderRight : joint::ShoulderLeft);
  const Vec3 elbow = shoulder + (0.28 * sc) * arm.upper;
  const Vec3 wrist = elbow + (0.26 * sc) * arm.lower;
  const Vec3 hand = wrist + (0.07 * sc) * arm.lower;
  f(right ? joint::ElbowRight : joint::ElbowLeft) = elbow;
  f(right ? joint::WristRight : joint::WristLeft) = wrist;
  f(right ? joint::HandRight : joint::HandLeft) = hand;
  f(right ? joint::HandTipRight : joint::HandTipLeft) = hand + (0.06 * sc) * arm.lower;
  f(right ? joint::ThumbRight : joint::ThumbLeft) = wrist + (0.04 * sc) * arm.lower + sc * Vec3{-side * 0.025, 0.0, 0.01};
}

void place_leg(SkeletonFrame& f, double hip_flex, double knee_flex, bool right, double sc) {
  const Vec3 hip = f(right ? joint::HipRight : joint::HipLeft);
  const Vec3 thigh{0.0, -std::cos(hip_flex), std::sin(hip_flex)};
  const double shank_angle = hip_flex - knee_flex;
  const Vec3 shank{0.0, -std::cos(shank_angle), std::sin(shank_angle)};
  const Vec3 knee = hip + (0.42 * sc) * thigh;
  const Vec3 ankle = knee + (0.40 * sc) * shank;
  f(right ? joint::KneeRight : joint::KneeLeft) = knee;
  f(right ? joint::AnkleRight : joint::AnkleLeft) = ankle;
  f(right ? joint::FootRight : joint::FootLeft) = ankle + sc * Vec3{0.0, -0.04, 0.10};
}

SkeletonFrame build_frame(const Pose& pose, const Performer& p) {
  const double sc = p.scale;
  SkeletonFrame f;
  f.joints.assign(kJointCount, Vec3{});
  f(joint::SpineBase) = {0.0, 0.0, 0.0};
  f(joint::SpineMid) = sc * Vec3{0.0, 0.28, 0.0};
  f(joint::SpineShoulder) = sc * Vec3{0.0, 0.50, 0.0};
  f(joint::Neck) = sc * Vec3{0.0, 0.56, 0.0};
  f(joint::Head) = sc * Vec3{0.0, 0.68, 0.02};
  f(joint::ShoulderLeft) = sc * Vec3{-0.18, 0.48, 0.0};
  f(joint::ShoulderRight) = sc * Vec3{0.18, 0.48, 0.0};
  f(joint::HipLeft) = sc * Vec3{-0.09, -0.04, 0.0};
  f(joint::HipRight) = sc * Vec3{0.09, -0.04, 0.0};
  place_arm(f, pose.left_arm, -1.0, sc);
  place_arm(f, pose.right_arm, 1.0, sc);
  place_leg(f, pose.hip_flex, pose.knee_flex, false, sc);
  place_leg(f, pose.hip_flex, pose.knee_flex, true, sc);

  const double c = std::cos(p.yaw), s = std::sin(p.yaw);
  for (auto& j : f.joints) j = p.origin + Vec3{c * j.x + s * j.z, j.y, -s * j.x + c * j.z};
  return f;
}

std::vector<SkeletonFrame> motion_frames(MotionKind kind, std::size_t n, const Performer& p) {
  if (kind == MotionKind::StandUp) {
    auto frames = motion_frames(MotionKind::SitDown, n, p);
    std::reverse(frames.begin(), frames.end());
    return frames;
  }
  std::vector<SkeletonFrame> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    frames.push_back(build_frame(pose_at(kind, t, p), p));
  }
  return frames;
}

void check_params(std::size_t frames, double noise_sigma) {
  if (frames < 4) throw Error(ErrorCode::InvalidParams, "synthetic sequences need at least 4 frames, got " + std::to_string(frames));
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(ErrorCode::InvalidParams, "noise sigma must be finite and non-negative");
}

SkeletonSequence finish(std::vector<SkeletonFrame> frames, double noise_sigma, std::uint64_t seed) {
  SkeletonSequence seq;
  seq.frames = std::move(frames);
  resequence(seq);
  if (noise_sigma > 0.0) {
    Rng rng(mix_seed(seed, 0x4E015E));
    for (auto& f : seq.frames)
      for (auto& j : f.joints) {
        j.x += noise_sigma * standard_normal(rng);
        j.y += noise_sigma * standard_normal(rng);
        j.z += noise_sigma * standard_normal(rng);
      }
  }
  return seq;
}

}  // namespace

const std::vector<MotionKind>& all_motion_kinds() {
  static const std::vector<MotionKind> kinds{MotionKind::RaiseArm, MotionKind::WaveHand, MotionKind::SitDown,
                                             MotionKind::StandUp,  MotionKind::Circle,   MotionKind::Box};
  return kinds;
}

std::string_view to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::RaiseArm: return "raise_arm";
    case MotionKind::WaveHand: return "wave_hand";
    case MotionKind::SitDown: return "sit_down";
    case MotionKind::StandUp: return "stand_up";
    case MotionKind::Circle: return "circle";
    case MotionKind::Box: return "box";
  }
  return "unknown";
}

MotionKind parse_motion_kind(std::string_view name) {
  for (MotionKind k : all_motion_kinds())
    if (to_string(k) == name) return k;
  throw Error(ErrorCode::InvalidParams, "unknown motion kind '" + std::string(name) + "'");
}

SkeletonSequence gen_synthetic(MotionKind kind, std::size_t frames, double noise_sigma, std::uint64_t seed) {
  check_params(frames, noise_sigma);
  return finish(motion_frames(kind, frames, draw_performer(seed)), noise_sigma, seed);
}

SkeletonSequence gen_composite(MotionKind first, MotionKind second, std::size_t frames, double noise_sigma,
                               std::uint64_t seed) {
  check_params(frames, noise_sigma);
  const Performer p = draw_performer(seed);
  auto out = motion_frames(first, frames / 2, p);
  auto tail = motion_frames(second, frames - frames / 2, p);
  out.insert(out.end(), tail.begin(), tail.end());
  return finish(std::move(out), noise_sigma, seed);
}

}  // namespace skelvol

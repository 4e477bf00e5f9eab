#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "skelvol/error.hpp"
#include "skelvol/preprocess.hpp"

using namespace skelvol;
using namespace skelvol::testing;

namespace {

SkeletonSequence single(SkeletonFrame f) {
  SkeletonSequence s;
  s.frames.push_back(std::move(f));
  return s;
}

double max_abs_diff(const Mat3& a, const Mat3& b) {
  double d = 0.0;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) d = std::max(d, std::abs(a.m[r][c] - b.m[r][c]));
  return d;
}

}  // namespace

TEST(CenterOnHip, ShiftsEveryJoint) {
  SkeletonFrame f = upright_frame({1, 2, 3});
  const auto out = center_on_hip(single(f));
  EXPECT_EQ(out.frames[0](joint::SpineBase), (Vec3{0, 0, 0}));
  for (std::size_t j = 0; j < kJointCount; ++j) {
    EXPECT_NEAR(out.frames[0].joints[j].x, f.joints[j].x - 1, 1e-15);
    EXPECT_NEAR(out.frames[0].joints[j].y, f.joints[j].y - 2, 1e-15);
    EXPECT_NEAR(out.frames[0].joints[j].z, f.joints[j].z - 3, 1e-15);
  }
}

TEST(CenterOnHip, CenteredFrameUnchanged) {
  const auto s = single(upright_frame());
  EXPECT_EQ(center_on_hip(s), s);
}

TEST(CenterOnHip, TranslationInvariantAndIdempotent) {
  auto seq = random_sequence(6, 21);
  auto shifted = seq;
  for (auto& f : shifted.frames)
    for (auto& j : f.joints) j = j + Vec3{0.5, -2.25, 4.0};
  const auto a = center_on_hip(seq), b = center_on_hip(shifted);
  for (std::size_t f = 0; f < a.frames.size(); ++f)
    for (std::size_t j = 0; j < kJointCount; ++j) {
      EXPECT_NEAR(a.frames[f].joints[j].x, b.frames[f].joints[j].x, 1e-14);
      EXPECT_NEAR(a.frames[f].joints[j].y, b.frames[f].joints[j].y, 1e-14);
      EXPECT_NEAR(a.frames[f].joints[j].z, b.frames[f].joints[j].z, 1e-14);
    }
  EXPECT_EQ(center_on_hip(a), a);
}

TEST(ViewNormalize, AlignedFrameGivesIdentity) {
  const auto vn = view_normalize(single(upright_frame()));
  EXPECT_FALSE(vn.degenerate);
  EXPECT_LT(max_abs_diff(vn.transform.rotation, Mat3::identity()), 1e-9);
}

TEST(ViewNormalize, HipsAlongZ) {
  SkeletonFrame f = upright_frame();
  f(joint::HipLeft) = {0, 0, -0.1};
  f(joint::HipRight) = {0, 0, 0.1};
  const auto vn = view_normalize(single(f));
  // Quarter turn about +y, right-handed: x' = z, z' = -x.
  const double t = std::numbers::pi / 2;
  const Mat3 expected = Mat3::from_rows({std::cos(t), 0, std::sin(t)}, {0, 1, 0}, {-std::sin(t), 0, std::cos(t)});
  EXPECT_LT(max_abs_diff(vn.transform.rotation, expected), 1e-12);
  const Vec3 hip = vn.sequence.frames[0](joint::HipRight) - vn.sequence.frames[0](joint::HipLeft);
  EXPECT_NEAR(hip.x, 0.2, 1e-12);
  EXPECT_NEAR(hip.y, 0.0, 1e-12);
  EXPECT_NEAR(hip.z, 0.0, 1e-12);
}

TEST(ViewNormalize, FirstFrameAxesLandOnTarget) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto seq = center_on_hip(random_sequence(4, 100 + static_cast<std::uint64_t>(trial)));
    const auto vn = view_normalize(seq);
    ASSERT_FALSE(vn.degenerate);
    const auto& f = vn.sequence.frames[0];
    const Vec3 hip = f(joint::HipRight) - f(joint::HipLeft);
    EXPECT_GT(hip.x, 0);
    EXPECT_NEAR(hip.y, 0, 1e-12);
    EXPECT_NEAR(hip.z, 0, 1e-12);
    const Vec3 spine = f(joint::SpineMid) - f(joint::SpineBase);
    EXPECT_GT(spine.y, 0);
    EXPECT_NEAR(spine.z, 0, 1e-12);
    EXPECT_NEAR(vn.transform.rotation.determinant(), 1.0, 1e-12);
  }
}

TEST(ViewNormalize, PreservesDistances) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto seq = center_on_hip(random_sequence(5, seed));
    const auto vn = view_normalize(seq);
    for (std::size_t f = 0; f < seq.frames.size(); ++f)
      for (std::size_t a = 0; a < kJointCount; ++a)
        for (std::size_t b = a + 1; b < kJointCount; ++b) {
          const double before = norm(seq.frames[f].joints[a] - seq.frames[f].joints[b]);
          const double after = norm(vn.sequence.frames[f].joints[a] - vn.sequence.frames[f].joints[b]);
          ASSERT_NEAR(before, after, 1e-9);
        }
  }
}

TEST(ViewNormalize, UsesFirstFrameOnly) {
  auto seq = center_on_hip(random_sequence(3, 77));
  auto other = seq;
  other.frames[1] = upright_frame();
  other.frames[2] = upright_frame({0.3, 0.1, 0.2});
  EXPECT_EQ(view_normalize(seq).transform.rotation.m, view_normalize(other).transform.rotation.m);
}

TEST(ViewNormalize, CoincidentHipsFallBack) {
  SkeletonFrame f = upright_frame();
  f(joint::HipLeft) = f(joint::HipRight) = {0.05, 0, 0};
  const auto s = single(f);
  const auto vn = view_normalize(s);
  EXPECT_TRUE(vn.degenerate);
  EXPECT_EQ(vn.transform.rotation.m, Mat3::identity().m);
  EXPECT_EQ(vn.sequence, s);
  EXPECT_FALSE(view_rotation(f).has_value());
}

TEST(ViewNormalize, SpineAlongHipsFallsBack) {
  SkeletonFrame f = upright_frame();
  f(joint::SpineMid) = {0.3, 0, 0};
  EXPECT_TRUE(view_normalize(single(f)).degenerate);
}

TEST(BoneGraph, IsSpanningTree) {
  const auto& edges = ntu_bone_graph();
  ASSERT_EQ(edges.size(), 24u);
  std::vector<int> parent(26);
  for (int i = 1; i <= 25; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)];
    return v;
  };
  for (auto [a, b] : edges) {
    ASSERT_NE(a, b);
    ASSERT_GE(a, 1);
    ASSERT_LE(b, 25);
    const int ra = find(a), rb = find(b);
    ASSERT_NE(ra, rb) << "cycle through " << a << "-" << b;
    parent[static_cast<std::size_t>(ra)] = rb;
  }
  std::set<int> roots;
  for (int i = 1; i <= 25; ++i) roots.insert(find(i));
  EXPECT_EQ(roots.size(), 1u);
}

TEST(InterpolateBones, ZeroKeepsJoints) {
  auto seq = random_sequence(3, 31);
  const auto pcs = interpolate_bones(seq, 0);
  ASSERT_EQ(pcs.frame_count(), 3u);
  for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(pcs.frames[f], seq.frames[f].joints);
}

TEST(InterpolateBones, UnitBone) {
  SkeletonFrame f;
  f.joints.assign(kJointCount, Vec3{});
  const auto [parent, child] = ntu_bone_graph()[0];
  f(parent) = {0, 0, 0};
  f(child) = {1, 0, 0};
  const auto one = interpolate_bones(single(f), 1);
  EXPECT_EQ(one.frames[0][25], (Vec3{0.5, 0, 0}));
  const auto three = interpolate_bones(single(f), 3);
  EXPECT_EQ(three.frames[0][25], (Vec3{0.25, 0, 0}));
  EXPECT_EQ(three.frames[0][26], (Vec3{0.5, 0, 0}));
  EXPECT_EQ(three.frames[0][27], (Vec3{0.75, 0, 0}));
}

TEST(InterpolateBones, CountAndCollinearity) {
  auto seq = random_sequence(2, 32);
  for (std::size_t k : {1u, 4u, 10u}) {
    const auto pcs = interpolate_bones(seq, k);
    EXPECT_EQ(pcs.point_count(), 2 * (25 + 24 * k));
    for (std::size_t f = 0; f < 2; ++f) {
      ASSERT_EQ(pcs.frames[f].size(), 25 + 24 * k);
      for (std::size_t e = 0; e < 24; ++e) {
        const auto [a, b] = ntu_bone_graph()[e];
        const Vec3 pa = seq.frames[f](a), pb = seq.frames[f](b);
        const Vec3 d = pb - pa;
        for (std::size_t i = 0; i < k; ++i) {
          const Vec3 p = pcs.frames[f][25 + e * k + i];
          const double t = dot(p - pa, d) / dot(d, d);
          EXPECT_GT(t, 0.0);
          EXPECT_LT(t, 1.0);
          EXPECT_LT(norm(cross(p - pa, d)) / norm(d), 1e-12);
        }
      }
    }
  }
}

TEST(TemporalSubsequence, RangesForEightFrames) {
  EXPECT_EQ(level_frame_range(8, 1), (std::pair<std::size_t, std::size_t>{1, 4}));
  EXPECT_EQ(level_frame_range(8, 2), (std::pair<std::size_t, std::size_t>{2, 6}));
  EXPECT_EQ(level_frame_range(8, 3), (std::pair<std::size_t, std::size_t>{4, 8}));
  auto seq = random_sequence(8, 41);
  const auto l2 = temporal_subsequence(seq, 2);
  ASSERT_EQ(l2.frame_count(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(l2.frames[i].joints, seq.frames[i + 1].joints);
    EXPECT_EQ(l2.frames[i].frame_index, static_cast<int>(i + 1));
  }
}

TEST(TemporalSubsequence, LevelZeroIsIdentity) {
  auto seq = random_sequence(3, 42);
  EXPECT_EQ(temporal_subsequence(seq, 0), seq);
}

TEST(TemporalSubsequence, Lengths) {
  for (std::size_t F = 4; F <= 200; ++F) {
    auto seq = random_sequence(F, F);
    EXPECT_EQ(temporal_subsequence(seq, 1).frame_count(), F / 2);
    EXPECT_EQ(temporal_subsequence(seq, 2).frame_count(), (3 * F) / 4 - F / 4 + 1);
    EXPECT_EQ(temporal_subsequence(seq, 3).frame_count(), F - F / 2 + 1);
  }
}

TEST(TemporalSubsequence, Errors) {
  auto seq = random_sequence(3, 43);
  for (int level : {1, 2, 3}) {
    try {
      temporal_subsequence(seq, level);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::SequenceTooShort);
    }
  }
  EXPECT_THROW(temporal_subsequence(random_sequence(8, 1), 4), Error);
  EXPECT_THROW(temporal_subsequence(random_sequence(8, 1), -1), Error);
}

TEST(RigidTransform, InverseUndoes) {
  const auto vn = view_normalize(center_on_hip(random_sequence(1, 44)));
  const RigidTransform inv = vn.transform.inverse();
  const Vec3 p{0.3, -0.7, 1.9};
  const Vec3 q = inv.apply(vn.transform.apply(p));
  EXPECT_NEAR(q.x, p.x, 1e-12);
  EXPECT_NEAR(q.y, p.y, 1e-12);
  EXPECT_NEAR(q.z, p.z, 1e-12);
}

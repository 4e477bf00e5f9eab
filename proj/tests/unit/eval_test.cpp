#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "skelvol/error.hpp"
#include "skelvol/eval.hpp"
#include "skelvol/synthetic.hpp"

using namespace skelvol;
using namespace skelvol::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::InvalidParams;
}

SampleMeta meta(std::optional<int> subject, std::optional<int> camera) { return SampleMeta{subject, camera}; }

nn::StreamTopology tiny(std::size_t K) {
  nn::StreamTopology t;
  t.input_resolution = 8;
  t.blocks = {{2, {3, 3, 3}, true}};
  t.hidden = {4};
  t.classes = K;
  return t;
}

// Output layer forced to a constant answer.
void always_predict(MultiTemporalModel<double>& m, std::size_t cls) {
  for (auto& pair : m.levels) {
    if (!pair) continue;
    for (auto* net : {&pair->spatial, &pair->temporal}) {
      auto& out = net->denses().back();
      out.weight.fill(0.0);
      out.bias.fill(0.0);
      out.bias[cls] = 5.0;
    }
  }
}

}  // namespace

TEST(Splits, CrossViewPutsCameraOneInTest) {
  std::vector<SampleMeta> s;
  for (int i = 0; i < 9; ++i) s.push_back(meta(1 + i, 1 + i % 3));
  const auto split = split_dataset(s, SplitSpec::cross_view());
  EXPECT_EQ(split.test, (std::vector<std::size_t>{0, 3, 6}));
  EXPECT_EQ(split.train, (std::vector<std::size_t>{1, 2, 4, 5, 7, 8}));
}

TEST(Splits, SmartHomeSubjects) {
  std::vector<SampleMeta> s{meta(2, std::nullopt), meta(1, std::nullopt), meta(9, std::nullopt), meta(8, std::nullopt)};
  const auto split = split_dataset(s, SplitSpec::smart_home());
  EXPECT_EQ(split.test, (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(split.train, (std::vector<std::size_t>{1, 2}));
}

TEST(Splits, CrossSubjectList) {
  const auto spec = SplitSpec::cross_subject();
  EXPECT_EQ(spec.train_ids.size(), 20u);
  EXPECT_EQ(spec.test_ids.size(), 20u);
  EXPECT_TRUE(spec.train_ids.count(1) && spec.train_ids.count(38) && spec.test_ids.count(3) && spec.test_ids.count(40));
}

TEST(Splits, MissingMetadataAndEmptySides) {
  std::vector<SampleMeta> s{meta(1, 1), meta(std::nullopt, 2)};
  EXPECT_EQ(code_of([&] { split_dataset(s, SplitSpec::cross_subject()); }), ErrorCode::MissingMetadata);
  std::vector<SampleMeta> only_train{meta(1, 2), meta(2, 3)};
  EXPECT_EQ(code_of([&] { split_dataset(only_train, SplitSpec::cross_view()); }), ErrorCode::EmptyPartition);
  SplitSpec bad{Protocol::SubjectList, {1, 2}, {2}};
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidParams);
}

TEST(Splits, PartitionProperty) {
  Rng rng(1);
  std::vector<SampleMeta> s;
  for (int i = 0; i < 500; ++i) s.push_back(meta(1 + static_cast<int>(uniform_index(rng, 40)), 1 + static_cast<int>(uniform_index(rng, 3))));
  for (const auto& spec : {SplitSpec::cross_subject(), SplitSpec::cross_view()}) {
    const auto split = split_dataset(s, spec);
    std::vector<std::size_t> all(split.train);
    all.insert(all.end(), split.test.begin(), split.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> want(s.size());
    std::iota(want.begin(), want.end(), 0);
    EXPECT_EQ(all, want);
  }
}

TEST(ValidationSplit, SizesAndDeterminism) {
  const auto a = validation_split(100, 0.10, 5);
  EXPECT_EQ(a.test.size(), 10u);
  EXPECT_EQ(a.train.size(), 90u);
  EXPECT_EQ(a.train, validation_split(100, 0.10, 5).train);
  EXPECT_EQ(a.test, validation_split(100, 0.10, 5).test);
  EXPECT_NE(a.test, validation_split(100, 0.10, 6).test);
  std::vector<std::size_t> both(a.train);
  both.insert(both.end(), a.test.begin(), a.test.end());
  std::sort(both.begin(), both.end());
  EXPECT_EQ(std::adjacent_find(both.begin(), both.end()), both.end());
  EXPECT_EQ(both.size(), 100u);
  const auto b = validation_split(2, 0.5, 0);
  EXPECT_EQ(b.train.size(), 1u);
  EXPECT_EQ(b.test.size(), 1u);
}

TEST(ValidationSplit, Errors) {
  EXPECT_EQ(code_of([] { validation_split(3, 0.1, 0); }), ErrorCode::TooFewSamples);
  EXPECT_EQ(code_of([] { validation_split(1, 0.5, 0); }), ErrorCode::TooFewSamples);
  EXPECT_EQ(code_of([] { validation_split(10, 1.0, 0); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { validation_split(10, 0.0, 0); }), ErrorCode::InvalidParams);
}

TEST(Report, PerfectPredictions) {
  const std::vector<std::size_t> t{0, 1, 2, 1, 0};
  const auto r = make_report(t, t, 3);
  EXPECT_EQ(r.accuracy, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.confusion[i][j], i == j ? 1.0 : 0.0);
}

TEST(Report, AccuracyIsCountWeightedMean) {
  Rng rng(2);
  std::vector<std::size_t> t(200), p(200);
  for (auto& v : t) v = uniform_index(rng, 4);
  for (auto& v : p) v = uniform_index(rng, 4);
  const auto r = make_report(t, p, 4);
  double weighted = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    weighted += r.per_class_accuracy[c] * static_cast<double>(r.class_counts[c]);
    EXPECT_NEAR(std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), 0.0), 1.0, 1e-9);
  }
  EXPECT_NEAR(weighted / 200.0, r.accuracy, 1e-12);
}

TEST(Report, AbsentClassAndErrors) {
  const std::vector<std::size_t> t{0, 0}, p{0, 1};
  const auto r = make_report(t, p, 3);
  EXPECT_TRUE(std::isnan(r.per_class_accuracy[2]));
  EXPECT_EQ(r.confusion[2], (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(code_of([] { make_report({}, {}, 2); }), ErrorCode::EmptyPartition);
  EXPECT_EQ(code_of([&] { make_report(t, std::vector<std::size_t>{0, 3}, 3); }), ErrorCode::InvalidTarget);
  EXPECT_EQ(code_of([&] { make_report(t, std::vector<std::size_t>{0}, 3); }), ErrorCode::InvalidParams);
}

TEST(Evaluate, ConstantModelOnBalancedSet) {
  auto model = make_multi_temporal<double>(tiny(2), 1, std::array{0, 1, 2, 3});
  always_predict(model, 0);
  std::vector<SkeletonSequence> test;
  for (int i = 0; i < 6; ++i) {
    test.push_back(gen_synthetic(i % 2 ? MotionKind::Box : MotionKind::Circle, 12, 0.01, i));
    test.back().label = i % 2;
  }
  PipelineConfig cfg;
  cfg.encoding.resolution = 8;
  cfg.encoding.points_per_bone = 2;
  const auto r = evaluate<double>(model, test, cfg);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.confusion[1], (std::vector<double>{1.0, 0.0}));
  test[2].label.reset();
  EXPECT_EQ(code_of([&] { evaluate<double>(model, test, cfg); }), ErrorCode::MissingMetadata);
  EXPECT_EQ(code_of([&] { evaluate<double>(model, std::span<const SkeletonSequence>{}, cfg); }), ErrorCode::EmptyPartition);
}

TEST(Evaluate, AblationRowsAndThreadsAgree) {
  const auto model = make_multi_temporal<double>(tiny(3), 4, std::array{0, 1, 2, 3});
  EncodingConfig enc;
  enc.resolution = 8;
  enc.points_per_bone = 2;
  std::vector<EncodedSequence> encs;
  for (int i = 0; i < 9; ++i) encs.push_back(encode_sequence(random_sequence(i == 4 ? 3 : 10, i), enc));
  std::vector<LabeledEncoding> test;
  for (int i = 0; i < 9; ++i) test.push_back({&encs[i], static_cast<std::size_t>(i % 3)});
  const auto rows = evaluate_ablation<double>(model, test, LevelFusion::Product, 1);
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r.name);
  EXPECT_EQ(names, (std::vector<std::string>{"spatial", "temporal", "two-stream", "Level 0", "Level 1", "Level 2",
                                             "Level 3", "Level 0+1+2+3"}));
  EXPECT_EQ(rows[2].report.accuracy, rows[3].report.accuracy);
  const auto threaded = evaluate_ablation<double>(model, test, LevelFusion::Product, 3);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].report.confusion, threaded[i].report.confusion);
}

TEST(Writers, CsvLayouts) {
  const std::vector<std::size_t> t{0, 1, 1}, p{0, 1, 0};
  const auto r = make_report(t, p, 2);
  const std::vector<std::string> names{"sit", "stand"};
  std::ostringstream pc, cm, ab;
  write_per_class_csv(pc, r, names);
  EXPECT_EQ(pc.str().substr(0, pc.str().find('\n')), "class,name,count,accuracy");
  EXPECT_NE(pc.str().find("1,stand,2,0.5"), std::string::npos);
  write_confusion_csv(cm, r, names);
  EXPECT_EQ(cm.str().substr(0, cm.str().find('\n')), "truth\\predicted,sit,stand");
  const std::vector<AblationRow> rows{{"two-stream", r}};
  write_ablation_csv(ab, rows);
  EXPECT_EQ(ab.str().substr(0, ab.str().find('\n')), "mode,samples,accuracy");
  EXPECT_EQ(default_class_names(2), (std::vector<std::string>{"class_0", "class_1"}));
}

TEST(Synthetic, ReversedPairIsExact) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto sit = gen_synthetic(MotionKind::SitDown, 30, 0.0, s);
    const auto stand = gen_synthetic(MotionKind::StandUp, 30, 0.0, s);
    const auto r = reversed(sit);
    ASSERT_EQ(r.frames.size(), stand.frames.size());
    for (std::size_t f = 0; f < r.frames.size(); ++f) EXPECT_EQ(r.frames[f].joints, stand.frames[f].joints);
    const auto pa = interpolate_bones(sit, 5), pb = interpolate_bones(stand, 5);
    const auto b = fit_bounds(pa);
    EXPECT_EQ(fit_bounds(pb), b);
    EXPECT_EQ(encode_spatial(pa, b, 20), encode_spatial(pb, b, 20));
    EXPECT_NE(encode_temporal(pa, b, 20), encode_temporal(pb, b, 20));
  }
}

TEST(Synthetic, DeterministicAndValid) {
  for (MotionKind k : all_motion_kinds()) {
    const auto a = gen_synthetic(k, 20, 0.01, 7);
    EXPECT_EQ(a, gen_synthetic(k, 20, 0.01, 7));
    EXPECT_NE(a, gen_synthetic(k, 20, 0.01, 8));
    EXPECT_NO_THROW(validate(a));
    EXPECT_EQ(parse_motion_kind(to_string(k)), k);
  }
  const auto c = gen_composite(MotionKind::RaiseArm, MotionKind::SitDown, 20, 0.0, 1);
  EXPECT_EQ(c.frames.size(), 20u);
  EXPECT_NO_THROW(validate(c));
}

TEST(Synthetic, Errors) {
  EXPECT_EQ(code_of([] { gen_synthetic(MotionKind::Box, 3, 0.0, 0); }), ErrorCode::InvalidParams);
  EXPECT_EQ(code_of([] { gen_synthetic(MotionKind::Box, 8, -1.0, 0); }), ErrorCode::InvalidParams);
  EXPECT_THROW(parse_motion_kind("jump"), Error);
}

#include <gtest/gtest.h>

#include "skelvol/error.hpp"
#include "skelvol/run_config.hpp"

using namespace skelvol;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::MalformedFile;
}

}  // namespace

TEST(RunConfig, Defaults) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.resolution, 50u);
  EXPECT_EQ(cfg.learning_rate, 0.0005);
  EXPECT_EQ(cfg.momentum, 0.9);
  EXPECT_EQ(cfg.weight_decay, 1e-6);
  EXPECT_EQ(cfg.batch_size, 32u);
  EXPECT_EQ(cfg.dropout, 0.3);
  EXPECT_EQ(cfg.epochs, 250u);
  EXPECT_EQ(cfg.validation_fraction, 0.10);
  EXPECT_NO_THROW(cfg.validate());
  const auto t = cfg.train_config();
  EXPECT_EQ(t.sgd.learning_rate, 0.0005);
  EXPECT_FALSE(t.stop_at_train_accuracy.has_value());
  EXPECT_FALSE(cfg.split_spec().has_value());
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig cfg;
  cfg.resolution = 32;
  cfg.levels = {0, 2};
  cfg.seed = 123456789012345ull;
  cfg.learning_rate = 0.1 + 0.2;
  cfg.split.protocol = "cross_view";
  const RunConfig back = run_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.learning_rate, cfg.learning_rate);
  EXPECT_EQ(back.split_spec()->protocol, Protocol::CrossView);
}

TEST(RunConfig, RangeChecks) {
  const auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](RunConfig& c) { c.learning_rate = 0; }), ErrorCode::InvalidParams);
  EXPECT_EQ(bad([](RunConfig& c) { c.dropout = 1.0; }), ErrorCode::InvalidParams);
  EXPECT_EQ(bad([](RunConfig& c) { c.batch_size = 0; }), ErrorCode::InvalidParams);
  EXPECT_EQ(bad([](RunConfig& c) { c.levels = {1, 2}; }), ErrorCode::InvalidParams);
  EXPECT_EQ(bad([](RunConfig& c) { c.levels = {0, 0}; }), ErrorCode::InvalidParams);
  EXPECT_EQ(bad([](RunConfig& c) { c.fusion = "max"; }), ErrorCode::InvalidParams);
}

TEST(RunConfig, UnknownKeysAndBadJson) {
  EXPECT_THROW(run_config_from_json(R"({"learning_rat": 1})"), Error);
  EXPECT_THROW(run_config_from_json("{"), Error);
  EXPECT_EQ(run_config_from_json(R"({"epochs": 3})").epochs, 3u);
}

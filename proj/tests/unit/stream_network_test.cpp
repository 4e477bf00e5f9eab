#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "skelvol/error.hpp"
#include "skelvol/stream_network.hpp"
#include "skelvol/two_stream.hpp"

using namespace skelvol;
using namespace skelvol::nn;
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

StreamTopology tiny_topology(std::size_t classes = 3) {
  StreamTopology t;
  t.input_resolution = 8;
  t.blocks = {{2, {3, 3, 3}, true}, {3, {3, 1, 3}, false}};
  t.hidden = {6};
  t.classes = classes;
  t.dropout = 0.3;
  return t;
}

VoxelGrid random_grid(std::size_t R, std::uint64_t seed, double density = 0.2) {
  Rng rng(seed);
  VoxelGrid g = VoxelGrid::zeros(R, GridBounds{{0, 0, 0}, 1.0}, VolumeKind::Spatial);
  for (auto& v : g.values) v = uniform01(rng) < density ? 1.0f : 0.0f;
  return g;
}

std::size_t allocated(const StreamNetwork<double>& net) {
  std::size_t n = 0;
  for (const auto& c : net.convs()) n += c.weight.size() + c.bias.size();
  for (const auto& d : net.denses()) n += d.weight.size() + d.bias.size();
  return n;
}

}  // namespace

TEST(ParamCount, SingleLayerFormulas) {
  StreamTopology conv;
  conv.input_resolution = 8;
  conv.blocks = {{3, {7, 7, 5}, true}};
  conv.hidden = {};
  conv.classes = 2;
  EXPECT_EQ(param_table(conv).front().count, 738u);
  StreamTopology dense = conv;
  dense.blocks = {{512, {1, 1, 1}, true}};
  dense.input_resolution = 1;
  dense.pool_window = 1;
  dense.hidden = {256};
  EXPECT_EQ(param_table(dense).at(1).count, 131328u);
}

TEST(ParamCount, StandardTopologyAtDefaultResolution) {
  const auto t = StreamTopology::standard(50, 60);
  EXPECT_FALSE(t.blocks.back().same_padding);
  EXPECT_EQ(t.flatten_size(), 64u * 2 * 1 * 2);
  const std::size_t expected = 3 * (1 * 245 + 1) + 8 * (3 * 75 + 1) + 32 * (8 * 75 + 1) + 64 * (32 * 45 + 1) +
                               (256 * 512 + 512) + (512 * 256 + 256) + (256 * 60 + 60);
  EXPECT_EQ(param_count(t), expected);
  EXPECT_EQ(param_count(t), 392334u);
  EXPECT_LT(param_count(t), 2000000u);
  EXPECT_EQ(allocated(StreamNetwork<double>(t, 1)), expected);
  EXPECT_EQ(StreamNetwork<double>(t, 1).param_count(), expected);
}

TEST(ParamCount, SmallResolutionFallsBackToSame) {
  const auto t = StreamTopology::standard(32, 4);
  EXPECT_TRUE(t.blocks.back().same_padding);
  EXPECT_EQ(param_count(t), allocated(StreamNetwork<double>(t, 0)));
}

TEST(Topology, RejectsUnfittableInput) {
  auto t = tiny_topology();
  t.input_resolution = 2;
  EXPECT_EQ(code_of([&] { t.validate(); }), ErrorCode::ShapeMismatch);
}

TEST(StreamNetwork, ProbabilitiesAreADistribution) {
  const StreamNetwork<double> net(StreamTopology::standard(16, 5), 3);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto p = net.predict(random_grid(16, s));
    ASSERT_EQ(p.size(), 5u);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(StreamNetwork, DeterministicForward) {
  const auto g = random_grid(8, 4);
  const StreamNetwork<float> a(tiny_topology(), 9), b(tiny_topology(), 9);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.predict(g), b.predict(g));
  EXPECT_EQ(a.predict(g), a.predict(g));
  EXPECT_FALSE(a == StreamNetwork<float>(tiny_topology(), 10));
}

TEST(StreamNetwork, ResolutionMismatch) {
  const StreamNetwork<double> net(tiny_topology(), 0);
  EXPECT_EQ(code_of([&] { net.predict(random_grid(9, 0)); }), ErrorCode::ShapeMismatch);
}

TEST(StreamNetwork, GlorotBounds) {
  const StreamNetwork<double> net(tiny_topology(), 2);
  const auto& w = net.convs()[0].weight;
  const double fan_in = 27, fan_out = 2 * 27;
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double v : w.storage()) EXPECT_LE(std::abs(v), limit);
  for (double v : net.convs()[0].bias.storage()) EXPECT_EQ(v, 0.0);
}

TEST(StreamNetwork, EndToEndFiniteDifferences) {
  StreamTopology t = tiny_topology();
  t.dropout = 0.3;
  StreamNetwork<double> net(t, 5);
  Rng rng(6);
  for (auto p : net.parameters())
    for (auto& v : p) v += uniform(rng, -0.05, 0.05);  // break zero biases away from ReLU kinks
  const auto input = net.make_input(random_grid(8, 7, 0.5));
  auto grads = net.make_gradients();
  net.backprop(input, 1, true, 42, grads);
  auto params = net.parameters();
  double worst = 0.0;
  for (std::size_t a = 0; a < params.size(); ++a) {
    std::vector<double> vals(params[a].begin(), params[a].end());
    const std::vector<double> analytic(grads.tensors()[a].storage());
    for (std::size_t i = 0; i < vals.size(); i += 3) {
      const double saved = params[a][i];
      params[a][i] = saved + 1e-5;
      const double up = net.loss(input, 1, true, 42);
      params[a][i] = saved - 1e-5;
      const double down = net.loss(input, 1, true, 42);
      params[a][i] = saved;
      worst = std::max(worst, relative_error(analytic[i], (up - down) / 2e-5, 1e-7));
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const StreamNetwork<float> net(tiny_topology(), 11);
  std::stringstream buf;
  save_checkpoint(buf, net);
  const auto back = load_checkpoint<float>(buf);
  EXPECT_EQ(back, net);
  std::stringstream again;
  save_checkpoint(again, back);
  std::stringstream first;
  save_checkpoint(first, net);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Checkpoint, Errors) {
  const StreamNetwork<double> net(tiny_topology(), 1);
  std::stringstream buf;
  save_checkpoint(buf, net);
  const std::string bytes = buf.str();
  std::stringstream wrong_width(bytes);
  EXPECT_EQ(code_of([&] { load_checkpoint<float>(wrong_width); }), ErrorCode::IncompatibleCheckpoint);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream magic(bad);
  EXPECT_EQ(code_of([&] { load_checkpoint<double>(magic); }), ErrorCode::VersionMismatch);
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_EQ(code_of([&] { load_checkpoint<double>(cut); }), ErrorCode::IoError);
}

namespace {

struct Toy {
  std::vector<VoxelGrid> grids;
  std::vector<LabeledVolume> samples;
};

Toy toy_data(std::size_t per_class, std::size_t classes, std::uint64_t seed) {
  Toy t;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      VoxelGrid g = random_grid(8, seed + 100 * c + i, 0.05);
      for (std::size_t k = 0; k < 8; ++k) g.values[g.offset(c * 2, k, k)] = 1.0f;  // class signature
      t.grids.push_back(std::move(g));
    }
  for (std::size_t i = 0; i < t.grids.size(); ++i) t.samples.push_back({&t.grids[i], i / per_class});
  return t;
}

}  // namespace

TEST(TrainStream, ZeroLearningRateKeepsParameters) {
  const auto data = toy_data(3, 3, 0);
  StreamNetwork<double> net(tiny_topology(), 1);
  const auto before = net;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.sgd.learning_rate = 0.0;
  train_stream<double>(net, data.samples, {}, cfg);
  EXPECT_EQ(net, before);
}

TEST(TrainStream, ReproducibleLogsAndWeights) {
  const auto data = toy_data(4, 3, 1);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 3;
  cfg.sgd.learning_rate = 0.05;
  cfg.seed = 77;
  StreamNetwork<float> a(tiny_topology(), 3), b(tiny_topology(), 3);
  const auto la = train_stream<float>(a, std::span(data.samples).subspan(0, 9), std::span(data.samples).subspan(9), cfg);
  const auto lb = train_stream<float>(b, std::span(data.samples).subspan(0, 9), std::span(data.samples).subspan(9), cfg);
  EXPECT_EQ(a, b);
  std::ostringstream ca, cb;
  la.write_csv(ca);
  lb.write_csv(cb);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ca.str().substr(0, ca.str().find('\n')), "epoch,train_loss,train_error,val_error,best_val_error");
  ASSERT_EQ(la.epochs.size(), 4u);
  for (std::size_t e = 1; e < la.epochs.size(); ++e)
    EXPECT_LE(la.epochs[e].best_validation_error, la.epochs[e - 1].best_validation_error);
}

TEST(TrainStream, MemorizesToyData) {
  const auto data = toy_data(4, 3, 2);
  StreamNetwork<double> net(tiny_topology(), 4);
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.batch_size = 4;
  cfg.sgd.learning_rate = 0.05;
  cfg.stop_at_train_accuracy = 1.0;
  const auto log = train_stream<double>(net, data.samples, {}, cfg);
  EXPECT_EQ(stream_accuracy<double>(net, data.samples), 1.0);
  EXPECT_TRUE(std::isnan(log.epochs.back().validation_error));
}

TEST(TrainStream, Errors) {
  const auto data = toy_data(2, 2, 3);
  StreamNetwork<double> net(tiny_topology(3), 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_EQ(code_of([&] { train_stream<double>(net, {}, {}, cfg); }), ErrorCode::EmptyDataset);
  EXPECT_EQ(code_of([&] { train_stream<double>(net, data.samples, {}, cfg); }), ErrorCode::ClassMissing);
  auto bad = data.samples;
  bad[0].label = 5;
  EXPECT_EQ(code_of([&] { train_stream<double>(net, bad, {}, cfg); }), ErrorCode::InvalidTarget);
}

TEST(TrainStream, DivergenceIsNumericError) {
  const auto data = toy_data(2, 3, 4);
  StreamNetwork<float> net(tiny_topology(3), 1);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 1;
  cfg.sgd.learning_rate = 1e30;
  EXPECT_EQ(code_of([&] { train_stream<float>(net, data.samples, {}, cfg); }), ErrorCode::NumericError);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "apfnet/errors.hpp"
#include "apfnet/generator.hpp"
#include "apfnet/loss.hpp"
#include "apfnet/training.hpp"
#include "test_support.hpp"

namespace apfnet {
namespace {

using testing::Rng;

ModelParameters filled(double value, int hidden = 2) {
  ModelParameters p = ModelParameters::zeros(hidden);
  for (auto& a : p.arrays()) {
    for (double& v : a.values) v = value;
  }
  return p;
}

double naive_mse(const Map2d& a, const Map2d& b) {
  double sum = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) sum += (a(r, c) - b(r, c)) * (a(r, c) - b(r, c));
  }
  return sum / static_cast<double>(a.rows() * a.cols());
}

TEST(MseLoss, HandValues) {
  Rng rng(1);
  const Map2d m = testing::random_map(rng);
  const LossAndGrad same = mse_loss(m, m);
  EXPECT_EQ(same.loss, 0.0);
  for (double g : same.grad.values()) EXPECT_EQ(g, 0.0);

  EXPECT_DOUBLE_EQ(mse_loss(Map2d(36, 9, 1.0), Map2d(36, 9, 0.0)).loss, 1.0);

  Map2d one_off(36, 9, 0.3);
  one_off(10, 2) = 0.8;
  EXPECT_NEAR(mse_loss(one_off, Map2d(36, 9, 0.3)).loss, 7.7160e-4, 1e-8);
  EXPECT_DOUBLE_EQ(mse_loss(one_off, Map2d(36, 9, 0.3)).loss, 0.25 / 324.0);
}

TEST(MseLoss, MatchesDoubleLoopOracleProperty) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Map2d a = testing::random_map(rng);
    const Map2d b = testing::random_map(rng);
    const LossAndGrad lg = mse_loss(a, b);
    EXPECT_NEAR(lg.loss, naive_mse(a, b), 1e-12);
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR(lg.grad.data()[k], 2.0 * (a.data()[k] - b.data()[k]) / 324.0, 1e-15);
    }
  }
}

TEST(MseLoss, ShapeMismatchRejected) {
  EXPECT_THROW(mse_loss(Map2d(36, 9), Map2d(9, 36)), InputError);
}

TEST(SequenceLoss, MeanOverFrames) {
  Rng rng(3);
  std::vector<Map2d> pred, ideal;
  double expected = 0.0;
  for (int t = 0; t < 4; ++t) {
    pred.push_back(testing::random_map(rng));
    ideal.push_back(testing::random_map(rng));
    expected += naive_mse(pred.back(), ideal.back()) / 4.0;
  }
  const SequenceLoss sl = sequence_loss(pred, ideal);
  EXPECT_NEAR(sl.loss, expected, 1e-12);
  ASSERT_EQ(sl.grads.size(), 4u);
  EXPECT_NEAR(sl.grads[2](5, 5), 2.0 * (pred[2](5, 5) - ideal[2](5, 5)) / 324.0 / 4.0, 1e-15);
  EXPECT_THROW(sequence_loss(pred, std::vector<Map2d>(3, Map2d(36, 9))), InputError);
}

TEST(Optimizer, ZeroGradientsLeaveParametersUnchanged) {
  const ModelParameters p = ModelParameters::initialized(1, 4);
  const ModelParameters zero = ModelParameters::zeros(4);
  for (auto kind : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    Optimizer opt({kind});
    const ModelParameters q = apply_update(p, zero, opt);
    EXPECT_EQ(q.lstm.w_x, p.lstm.w_x);
    EXPECT_EQ(q.gru.b_h, p.gru.b_h);
  }
}

TEST(Optimizer, SgdOneStep) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 0.1;
  Optimizer opt(cfg);
  const ModelParameters q = apply_update(filled(1.0), filled(1.0), opt);
  for (const auto& a : q.arrays()) {
    for (double v : a.values) EXPECT_DOUBLE_EQ(v, 0.9);
  }
}

TEST(Optimizer, AdamFirstStepIsAboutLearningRate) {
  Optimizer opt(OptimizerConfig{});
  const ModelParameters q = apply_update(filled(1.0), filled(1.0), opt);
  for (const auto& a : q.arrays()) {
    for (double v : a.values) EXPECT_NEAR(1.0 - v, 1e-3, 1e-10);
  }
}

TEST(Optimizer, AdamMatchesScalarRecurrence) {
  Rng rng(4);
  OptimizerConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.beta1 = 0.8;
  cfg.beta2 = 0.95;
  cfg.epsilon = 1e-6;
  Optimizer opt(cfg);
  ModelParameters p = filled(0.5);
  double theta = 0.5, m = 0.0, v = 0.0;
  for (int step = 1; step <= 6; ++step) {
    const double g = rng.uniform(-2.0, 2.0);
    opt.apply(p, filled(g));
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mh = m / (1 - std::pow(cfg.beta1, step));
    const double vh = v / (1 - std::pow(cfg.beta2, step));
    theta -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.epsilon);
    EXPECT_NEAR(p.conv3.bias[0], theta, 1e-12);
    EXPECT_NEAR(p.gru.w_h(1, 0), theta, 1e-12);
  }
  EXPECT_EQ(opt.steps(), 6);
}

TEST(Optimizer, NonFiniteGradientNamesArrayAndLeavesParams) {
  ModelParameters p = ModelParameters::initialized(2, 4);
  const ModelParameters before = p;
  ModelParameters g = ModelParameters::zeros(4);
  g.lstm.w_h(0, 1) = std::numeric_limits<double>::infinity();
  Optimizer opt(OptimizerConfig{});
  try {
    opt.apply(p, g);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("lstm.w_h"), std::string::npos);
  }
  EXPECT_EQ(p.lstm.w_h, before.lstm.w_h);
  EXPECT_EQ(opt.steps(), 0);
}

std::vector<Sample> small_dataset(int count, std::uint64_t seed) {
  const auto suite = generate_suite(static_cast<std::size_t>(count), seed);
  return make_dataset(suite, GridSpec{}, ApfParams{});
}

TEST(MakeSample, InputsAreRastersAndTargetsIdealMaps) {
  const auto suite = generate_suite(3, 5);
  for (const auto& s : suite) {
    const Sample smp = make_sample(s, GridSpec{}, ApfParams{});
    ASSERT_EQ(smp.inputs.size(), static_cast<std::size_t>(s.horizon_steps));
    ASSERT_EQ(smp.targets.size(), smp.inputs.size());
    for (int t = 0; t < s.horizon_steps; ++t) {
      EXPECT_EQ(smp.inputs[t], rasterize(s, t, GridSpec{}).values);
      EXPECT_EQ(smp.targets[t], build_ideal_frame(s, t, GridSpec{}, ApfParams{}).grid.values);
    }
  }
}

TEST(TrainEpoch, EmptyPartitionRejected) {
  ModelParameters p = ModelParameters::zeros(4);
  Optimizer opt(OptimizerConfig{});
  std::mt19937_64 rng(1);
  EXPECT_THROW(train_epoch(p, {}, opt, rng), InputError);
}

TEST(TrainEpoch, ZeroLearningRateChangesNothing) {
  const auto data = small_dataset(3, 6);
  ModelParameters p = ModelParameters::initialized(6, 8);
  const ModelParameters before = p;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 0.0;
  Optimizer opt(cfg);
  std::mt19937_64 rng(6);
  const double first = train_epoch(p, data, opt, rng);
  const double second = train_epoch(p, data, opt, rng);
  EXPECT_NEAR(first, second, 1e-12);
  EXPECT_EQ(p.lstm.w_x, before.lstm.w_x);
  EXPECT_EQ(p.conv1.weight, before.conv1.weight);
}

TEST(TrainEpoch, LossIsNonNegativeAndFinite) {
  const auto data = small_dataset(4, 7);
  ModelParameters p = ModelParameters::initialized(7, 8);
  Optimizer opt(OptimizerConfig{});
  std::mt19937_64 rng(7);
  for (int e = 0; e < 3; ++e) {
    const double loss = train_epoch(p, data, opt, rng);
    EXPECT_GE(loss, 0.0);
    EXPECT_TRUE(std::isfinite(loss));
  }
}

TEST(TrainEpoch, OverfitsASingleSequence) {
  const auto data = small_dataset(1, 8);
  ModelParameters p = ModelParameters::initialized(8);
  Optimizer opt(OptimizerConfig{});
  std::mt19937_64 rng(8);
  const double first = train_epoch(p, data, opt, rng);
  double last = first;
  for (int e = 2; e <= 200; ++e) last = train_epoch(p, data, opt, rng);
  EXPECT_LT(last, 0.1 * first) << "first " << first << " last " << last;
}

TEST(Fit, RecordsDeterminismAndSplit) {
  const auto data = small_dataset(10, 9);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.lstm_hidden = 16;
  const FitResult a = fit(cfg, data);
  const FitResult b = fit(cfg, data);
  ASSERT_EQ(a.records.size(), 3u);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.records[e].epoch, static_cast<int>(e + 1));
    EXPECT_EQ(a.records[e].train_loss, b.records[e].train_loss);
    EXPECT_EQ(a.records[e].test_loss, b.records[e].test_loss);
    EXPECT_GE(a.records[e].test_loss, 0.0);
  }
  EXPECT_EQ(a.params.gru.w_h, b.params.gru.w_h);
  EXPECT_EQ(a.train_indices.size(), 8u);
  EXPECT_EQ(a.test_indices.size(), 2u);
  EXPECT_EQ(loss_history_csv(a.records), loss_history_csv(b.records));

  std::vector<bool> seen(10, false);
  for (auto i : a.train_indices) seen[i] = true;
  for (auto i : a.test_indices) {
    EXPECT_FALSE(seen[i]);
    seen[i] = true;
  }
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(Fit, TrainLossFallsByEpochFive) {
  const auto data = small_dataset(40, 42);
  TrainConfig cfg;
  cfg.epochs = 5;
  const FitResult r = fit(cfg, data);
  EXPECT_LT(r.records[4].train_loss, r.records[0].train_loss);
}

TEST(Fit, EpochCallbackSeesEveryRecord) {
  const auto data = small_dataset(4, 10);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lstm_hidden = 4;
  int calls = 0;
  fit(cfg, data, [&](const LossRecord& r) { EXPECT_EQ(r.epoch, ++calls); });
  EXPECT_EQ(calls, 2);
}

TEST(Fit, RejectsBadInput) {
  TrainConfig cfg;
  EXPECT_THROW(fit(cfg, small_dataset(1, 11)), InputError);
  cfg.epochs = 0;
  EXPECT_THROW(fit(cfg, small_dataset(2, 11)), InputError);
  cfg = TrainConfig{};
  cfg.train_fraction = 1.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = TrainConfig{};
  cfg.optimizer.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
}

TEST(LossHistory, CsvLayout) {
  const std::vector<LossRecord> recs{{1, 0.5, 0.25, 0.7}, {2, 0.125, 0.0625, 0.2}};
  EXPECT_EQ(loss_history_csv(recs), "epoch,train_loss,test_loss\n1,0.5,0.25\n2,0.125,0.0625\n");
}

}  // namespace
}  // namespace apfnet

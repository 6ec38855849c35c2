#include <gtest/gtest.h>

#include "deeprank/error.hpp"
#include "deeprank/least_squares.hpp"
#include "deeprank/rng.hpp"
#include "deeprank/training.hpp"

namespace deeprank {
namespace {

struct LinearTask {
  DenseMatrix x;
  std::vector<double> y;
};

LinearTask linear_task(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LinearTask t{DenseMatrix(n, 3), std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < 3; ++c) t.x(r, c) = rng.normal();
    t.y[r] = 0.5 * t.x(r, 0) - 0.25 * t.x(r, 1) + 0.1 * t.x(r, 2) + 0.2;
  }
  return t;
}

TEST(Training, ZeroModelOnZeroLabelsStaysPut) {
  const auto t = linear_task(30, 1);
  const auto zero = MlpModel::zeros({3, 4, 1});
  const auto r = train(zero, t.x, std::vector<double>(30, 0.0), TrainConfig{});
  EXPECT_EQ(r.model, zero);
  ASSERT_EQ(r.trace.size(), 10u);
  for (const auto& e : r.trace) EXPECT_EQ(e.mse, 0.0);
  EXPECT_EQ(r.trace.front().epoch, 1);
  EXPECT_EQ(r.trace.back().epoch, 10);
}

TEST(Training, LearnsALinearTarget) {
  const auto t = linear_task(200, 2);
  TrainConfig c;
  c.epochs = 200;
  c.learning_rate = 1e-2;
  c.seed = 3;
  const auto r = train(MlpModel::create({3, 1}, 3), t.x, t.y, c);
  EXPECT_LT(r.final_mse(), 1e-3);
  EXPECT_LT(r.trace.back().mse, r.trace.front().mse);
}

TEST(Training, LstmLossDecreases) {
  Rng rng(5);
  SequenceBatch x;
  for (int s = 0; s < 3; ++s) {
    DenseMatrix m(100, 4);
    for (double& v : m.values()) v = rng.normal();
    x.push_back(std::move(m));
  }
  std::vector<double> y(100);
  for (std::size_t r = 0; r < 100; ++r) y[r] = 0.3 * x[2](r, 0) - 0.2 * x[1](r, 3);
  TrainConfig c;
  c.epochs = 30;
  c.learning_rate = 5e-3;
  const auto r = train(LstmModel::create(4, {6, 3}, 3, 1), x, y, c);
  EXPECT_LT(r.trace.back().mse, 0.5 * r.trace.front().mse);
}

TEST(Training, SameSeedSameModel) {
  const auto t = linear_task(50, 4);
  TrainConfig c;
  c.seed = 8;
  const auto a = train(MlpModel::create({3, 5, 1}, 1), t.x, t.y, c);
  const auto b = train(MlpModel::create({3, 5, 1}, 1), t.x, t.y, c);
  EXPECT_EQ(a.model, b.model);
  c.seed = 9;
  const auto d = train(MlpModel::create({3, 5, 1}, 1), t.x, t.y, c);
  EXPECT_NE(a.model, d.model);
}

TEST(Training, DivergenceIsATrainingError) {
  auto t = linear_task(20, 6);
  for (double& v : t.y) v *= 1e6;
  TrainConfig c;
  c.learning_rate = 1e200;
  try {
    train(MlpModel::create({3, 1}, 1), t.x, t.y, c);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.category(), ErrorCategory::numeric);
    EXPECT_EQ(std::string(e.what()).rfind("epoch ", 0), 0u) << e.what();
  }
}

TEST(Training, InvalidSettingsAreConfigErrors) {
  const auto t = linear_task(10, 7);
  const auto m = MlpModel::create({3, 1}, 1);
  TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(train(m, t.x, t.y, c), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(train(m, t.x, t.y, c), ConfigError);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(train(m, t.x, t.y, c), ConfigError);
  EXPECT_THROW(train(m, t.x, std::vector<double>(9, 0.0), TrainConfig{}), ArgumentError);
}

}  // namespace
}  // namespace deeprank

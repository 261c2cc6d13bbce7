#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dlr/classifier.hpp"
#include "dlr/error.hpp"
#include "dlr/random.hpp"

namespace {

using namespace dlr;
using namespace dlr::classifier;

DesignMatrix random_design(Rng& rng, std::size_t b, std::size_t n, std::size_t c) {
  DesignMatrix d;
  d.rows.resize(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < d.rows.size(); ++i) d.rows.data()[i] = rng.normal();
  d.class_count = c;
  for (std::size_t i = 0; i < b; ++i) d.labels.push_back(i % c);
  return d;
}

// Minimizes ||X W - Y||^2 + lambda ||W||^2 by plain gradient descent.
Eigen::MatrixXd gradient_descent_ridge(const DesignMatrix& d, double lambda) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d.rows.rows(), static_cast<Eigen::Index>(d.class_count));
  for (std::size_t i = 0; i < d.labels.size(); ++i)
    y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d.labels[i])) = 1.0;
  const Eigen::MatrixXd h = d.rows.transpose() * d.rows +
                            lambda * Eigen::MatrixXd::Identity(d.rows.cols(), d.rows.cols());
  const Eigen::MatrixXd g0 = d.rows.transpose() * y;
  const double step = 1.0 / h.operatorNorm();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d.rows.cols(), y.cols());
  for (int it = 0; it < 200000; ++it) {
    const Eigen::MatrixXd grad = h * w - g0;
    if (grad.cwiseAbs().maxCoeff() < 1e-13) break;
    w -= step * grad;
  }
  return w;
}

TEST(Ridge, ClosedFormMatchesIterativeOracle) {
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 2 + rng.below(6), c = 2 + rng.below(3);
    const std::size_t b = n + c + rng.below(20);
    const auto d = random_design(rng, b, n, c);
    const double lambda = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const auto model = train_ridge(d, lambda);
    const auto oracle = gradient_descent_ridge(d, lambda);
    EXPECT_LE((model.weights - oracle).cwiseAbs().maxCoeff(), 1e-6) << "instance " << rep;
  }
}

TEST(Ridge, NormalEquationsHold) {
  Rng rng(4);
  const auto d = random_design(rng, 60, 12, 3);
  const auto m = train_ridge(d, 0.5);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(60, 3);
  for (std::size_t i = 0; i < 60; ++i) y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d.labels[i])) = 1.0;
  const Eigen::MatrixXd residual = (d.rows.transpose() * d.rows + 0.5 * Eigen::MatrixXd::Identity(12, 12)) * m.weights -
                                   d.rows.transpose() * y;
  EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ridge, SeparableDataIsLearned) {
  DesignMatrix d;
  d.class_count = 3;
  d.rows.resize(30, 3);
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const int c = i % 3;
    for (int j = 0; j < 3; ++j) d.rows(i, j) = (j == c ? 5.0 : 0.0) + 0.1 * rng.normal();
    d.labels.push_back(static_cast<std::size_t>(c));
  }
  const auto m = train_ridge(d, 1e-3, {"a", "b", "c"});
  EXPECT_EQ(evaluate(m, d).accuracy, 1.0);
  EXPECT_EQ(m.label_map[2], "c");
}

TEST(Ridge, SingularWithoutRegularization) {
  DesignMatrix d;
  d.class_count = 2;
  d.rows.resize(4, 2);
  d.rows << 1, 1, 2, 2, 3, 3, 4, 4;
  d.labels = {0, 1, 0, 1};
  EXPECT_THROW((void)train_ridge(d, 0.0), SingularMatrix);
  EXPECT_NO_THROW((void)train_ridge(d, 1e-3));
}

TEST(Ridge, InputErrors) {
  Rng rng(1);
  auto d = random_design(rng, 10, 3, 2);
  EXPECT_THROW((void)train_ridge(d, -1.0), InvalidArgument);
  auto bad = d;
  bad.labels[0] = 5;
  EXPECT_THROW((void)train_ridge(bad, 1.0), InvalidArgument);
  bad = d;
  bad.rows(0, 0) = std::nan("");
  EXPECT_THROW((void)train_ridge(bad, 1.0), InvalidArgument);
  bad = d;
  bad.labels.pop_back();
  EXPECT_THROW((void)train_ridge(bad, 1.0), InvalidArgument);
  bad = d;
  bad.class_count = 1;
  EXPECT_THROW((void)train_ridge(bad, 1.0), InvalidArgument);
  EXPECT_THROW((void)train_ridge(d, 1.0, {"only one"}), InvalidArgument);
}

TEST(Predict, TiesGoToLowestIndex) {
  RidgeModel m;
  m.weights = Eigen::MatrixXd::Zero(2, 3);
  const std::vector<double> x{1.0, -1.0};
  EXPECT_EQ(predict(m, x).label, 0u);
  m.weights(0, 1) = 1.0;
  m.weights(0, 2) = 1.0;
  EXPECT_EQ(predict(m, x).label, 1u);
  EXPECT_THROW((void)predict(m, std::vector<double>{1.0}), InvalidArgument);
}

TEST(Predict, RandomWeightsScoreChance) {
  // Mean over many random models must sit at 1/C.
  const std::size_t c = 4;
  double total = 0.0;
  const int seeds = 40;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(1000 + static_cast<std::uint64_t>(s));
    const auto d = random_design(rng, 400, 10, c);
    RidgeModel m;
    m.weights.resize(10, static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = rng.normal();
    total += evaluate(m, d).accuracy;
  }
  EXPECT_NEAR(total / seeds, 1.0 / c, 0.05);
}

TEST(Metrics, ConfusionAndPerClass) {
  const std::vector<std::size_t> truth{0, 0, 1, 1, 2}, pred{0, 1, 1, 1, 0};
  const auto m = score(truth, pred, 3);
  EXPECT_EQ(m.total, 5u);
  EXPECT_EQ(m.correct, 3u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  EXPECT_EQ(m.confusion(0, 1), 1);
  EXPECT_EQ(m.confusion(2, 0), 1);
  EXPECT_EQ(m.confusion.sum(), 5);
  EXPECT_EQ(m.per_class_accuracy, (std::vector<double>{0.5, 1.0, 0.0}));
}

TEST(Complexity, Goldens) {
  EXPECT_EQ(training_macs(100, 4, 2), 2453u);
  EXPECT_EQ(trainable_params(600, 20), 12000u);
}

TEST(Complexity, SplitLoopReduction) {
  // Readout of N against N/k (k summed split loops) on a 4-class task with
  // 640 training bursts, where the Gram term dominates.
  for (std::uint64_t n : {256u, 512u, 1024u}) {
    for (std::uint64_t k : {2u, 4u, 8u}) {
      const double ratio = static_cast<double>(training_macs(640, n, 4)) /
                           static_cast<double>(training_macs(640, n / k, 4));
      EXPECT_GE(ratio, 0.8 * static_cast<double>(k * k)) << "n=" << n << " k=" << k;
    }
  }
}

}  // namespace

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "gpkmd/error.hpp"
#include "gpkmd/gp.hpp"
#include "oracles.hpp"

using namespace gpkmd;

namespace {

TrainingSet random_set(int m, int p, int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd in(m * p, n), out(m, n);
  for (Eigen::Index i = 0; i < in.size(); ++i) in.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = u(rng);
  Eigen::VectorXd s = in.cwiseAbs().rowwise().maxCoeff();
  Eigen::VectorXd ss = out.cwiseAbs().rowwise().maxCoeff();
  Eigen::VectorXd next(m * p);
  for (Eigen::Index i = 0; i < next.size(); ++i) next(i) = u(rng);
  return TrainingSet(in, out, p, s, ss, 1.0, next);
}

TrainingSet drop_pair(const TrainingSet& ts, Eigen::Index k) {
  const auto n = ts.size();
  Eigen::MatrixXd in(ts.inputs().rows(), n - 1), out(ts.tasks(), n - 1);
  for (Eigen::Index j = 0, c = 0; j < n; ++j) {
    if (j == k) continue;
    in.col(c) = ts.inputs().col(j);
    out.col(c++) = ts.outputs().col(j);
  }
  return TrainingSet(in, out, ts.embedding_order(), ts.input_scales(), ts.output_scales(), ts.sample_period());
}

}  // namespace

TEST(Kernel, GaussianFormAndSymmetry) {
  const Eigen::Vector2d a(1.0, 2.0), b(0.0, -2.0), s(2.0, 4.0);
  const KernelParams kp{1.7, 0.8};
  const double d2 = std::pow(0.5, 2) + std::pow(1.0, 2);
  EXPECT_NEAR(kernel_eval(a, b, kp, s), 1.7 * std::exp(-d2 / (2 * 0.64)), 1e-15);
  EXPECT_EQ(kernel_eval(a, b, kp, s), kernel_eval(b, a, kp, s));
  EXPECT_EQ(kernel_eval(a, a, kp, s), 1.7);
}

TEST(Kernel, GramIsSymmetricPsd) {
  const auto ts = random_set(3, 2, 12, 1);
  const auto k = gram_matrix(ts, {1.0, 1.0});
  EXPECT_TRUE(k.isApprox(k.transpose(), 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  EXPECT_TRUE((k.diagonal().array() == 1.0).all());
}

TEST(Kernel, InvalidParams) {
  EXPECT_THROW((KernelParams{0.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((KernelParams{1.0, -1.0}.validate()), DomainError);
  EXPECT_THROW((KernelParams{1.0, std::numeric_limits<double>::infinity()}.validate()), DomainError);
}

TEST(TaskCovariance, FromOutputScales) {
  const auto t = TaskCovariance::from_output_scales(Eigen::Vector2d(2.0, 4.0), 0.01);
  EXPECT_EQ(t.matrix, Eigen::Vector2d(0.5, 0.25).asDiagonal().toDenseMatrix());
  EXPECT_EQ(t.noise_variances, Eigen::Vector2d(0.01, 0.01));
  EXPECT_NO_THROW(t.validate());
  TaskCovariance bad{Eigen::Matrix2d::Identity(), Eigen::Vector2d(-1, 0)};
  EXPECT_THROW(bad.validate(), DomainError);
  TaskCovariance asym{(Eigen::Matrix2d() << 1, 0.5, 0, 1).finished(), Eigen::Vector2d::Zero()};
  EXPECT_THROW(asym.validate(), DomainError);
  TaskCovariance indefinite{(Eigen::Matrix2d() << 1, 2, 2, 1).finished(), Eigen::Vector2d::Zero()};
  EXPECT_THROW(indefinite.validate(), DomainError);
}

TEST(Gp, SingleTaskReducesToStandardGp) {
  const auto ts = random_set(1, 3, 10, 2);
  const KernelParams kp{1.3, 0.9};
  const double noise = 0.05;
  const auto model = fit(ts, kp, TaskCovariance{Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, noise)});
  const auto k = gram_matrix(ts, kp);
  const Eigen::RowVectorXd expected =
      (k + noise * Eigen::MatrixXd::Identity(10, 10)).lu().solve(ts.outputs().transpose()).transpose();
  EXPECT_LT((model.weight_h() - expected).norm(), 1e-12 * expected.norm());
}

TEST(Gp, NoiseFreeInterpolation) {
  const auto ts = random_set(3, 2, 8, 3);
  const auto model = fit(ts, {1.0, 1.0}, TaskCovariance{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)});
  for (Eigen::Index k = 0; k < ts.size(); ++k) {
    EXPECT_LT((predict_mean(model, ts.inputs().col(k)) - ts.outputs().col(k)).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_EQ(model.jitter(), 0.0);
}

TEST(Gp, ZeroOutputsGiveZeroMean) {
  auto base = random_set(2, 2, 7, 4);
  TrainingSet ts(base.inputs(), Eigen::MatrixXd::Zero(2, 7), 2, base.input_scales(), Eigen::Vector2d::Ones(), 1.0);
  const auto model = fit(ts, {1.0, 2.0}, TaskCovariance::from_output_scales(Eigen::Vector2d::Ones(), 0.01));
  EXPECT_EQ(predict_mean(model, Eigen::VectorXd::Random(4)).norm(), 0.0);
}

TEST(Gp, MatchesDenseOracleWithFullTaskCovariance) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const auto ts = random_set(3, 2, 9, 10 + seed);
    const Eigen::MatrixXd l = Eigen::MatrixXd::Random(3, 3);
    TaskCovariance tasks{l * l.transpose() + 0.2 * Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d(1e-3, 1e-2, 1e-1)};
    const KernelParams kp{2.0, 1.5};
    const auto model = fit(ts, kp, tasks);
    const Eigen::VectorXd z = Eigen::VectorXd::Random(6);
    const auto dense = oracle::dense_gp(ts.inputs(), ts.outputs(), ts.input_scales(), kp.signal_variance,
                                        kp.length_scale, tasks.matrix, tasks.noise_variances, z);
    EXPECT_LT((predict_mean(model, z) - dense.mean).norm(), 1e-10);
    EXPECT_LT((predict_cov(model, z) - dense.cov).norm(), 1e-10);
    EXPECT_LT((model.weight_b() - tasks.matrix * model.weight_h()).norm(), 1e-12);
  }
}

TEST(Gp, PredictiveCovarianceSymmetricPsd) {
  const auto ts = random_set(4, 2, 15, 5);
  const auto model = fit(ts, {1.0, 0.7}, TaskCovariance::from_output_scales(ts.output_scales(), 1e-4));
  for (int t = 0; t < 20; ++t) {
    const auto cov = predict_cov(model, Eigen::VectorXd::Random(8));
    EXPECT_EQ((cov - cov.transpose()).norm(), 0.0);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues().minCoeff(), -1e-8);
  }
  // At a training input with tiny noise the variance nearly vanishes.
  const auto at_train = predict_cov(model, ts.inputs().col(3));
  EXPECT_LT(at_train.trace(), 1e-2);
}

TEST(Gp, SystemMatrixBlockLayout) {
  const Eigen::Matrix2d k = (Eigen::Matrix2d() << 1, 0.5, 0.5, 1).finished();
  const TaskCovariance tasks{(Eigen::Matrix3d() << 2, 1, 0, 1, 2, 0, 0, 0, 1).finished(), Eigen::Vector3d(0.1, 0.2, 0.3)};
  const auto a = system_matrix(k, tasks);
  ASSERT_EQ(a.rows(), 6);
  EXPECT_TRUE(a.block(0, 3, 3, 3).isApprox(0.5 * tasks.matrix));
  EXPECT_TRUE(a.block(3, 3, 3, 3).isApprox(tasks.matrix + Eigen::Matrix3d(tasks.noise_variances.asDiagonal())));
}

TEST(Gp, DuplicateInputsNeedJitterOrFail) {
  // Two identical inputs make K singular; with D = 0 the system is singular.
  auto base = random_set(2, 1, 5, 6);
  Eigen::MatrixXd in = base.inputs();
  in.col(4) = in.col(3);
  TrainingSet ts(in, base.outputs(), 1, base.input_scales(), base.output_scales(), 1.0);
  const TaskCovariance tasks{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
  try {
    const auto model = fit(ts, {1.0, 1.0}, tasks);
    EXPECT_GT(model.jitter(), 0.0);
    EXPECT_LE(model.jitter(), 1e-8);
  } catch (const FitError& e) {
    EXPECT_GT(e.condition_estimate(), 1e12);
  }
}

TEST(Gp, IndefiniteTaskCovarianceRejected) {
  const auto ts = random_set(1, 1, 3, 7);
  const TaskCovariance indefinite{-Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)};
  EXPECT_THROW(fit(ts, {1.0, 1.0}, indefinite), DomainError);
}

TEST(Loo, ClosedFormMatchesRefitting) {
  const auto ts = random_set(2, 2, 9, 8);
  const HyperCandidate cand{{1.5, 1.2}, 0.02};
  const auto tasks = TaskCovariance::from_output_scales(ts.output_scales(), cand.noise_variance);
  double se = 0.0, nlpd = 0.0;
  for (Eigen::Index k = 0; k < ts.size(); ++k) {
    const auto rest = drop_pair(ts, k);
    const auto pred = oracle::dense_gp(rest.inputs(), rest.outputs(), rest.input_scales(), cand.kernel.signal_variance,
                                       cand.kernel.length_scale, tasks.matrix, tasks.noise_variances,
                                       ts.inputs().col(k));
    const Eigen::VectorXd r = ts.outputs().col(k) - pred.mean;
    se += (r.array() / ts.output_scales().array()).square().sum();
    const Eigen::MatrixXd s = pred.cov + Eigen::MatrixXd(tasks.noise_variances.asDiagonal());
    nlpd += 0.5 * (r.dot(s.ldlt().solve(r)) + std::log(s.determinant()) + 2 * std::log(2 * std::numbers::pi));
  }
  se /= static_cast<double>(ts.size() * ts.tasks());
  nlpd /= static_cast<double>(ts.size());
  EXPECT_NEAR(loocv_score(ts, cand, LooObjective::kSquaredError), se, 1e-10 * std::max(1.0, se));
  EXPECT_NEAR(loocv_score(ts, cand, LooObjective::kNegLogPredictiveDensity), nlpd, 1e-9 * std::max(1.0, std::abs(nlpd)));
}

TEST(Loo, SelectionIsOrderIndependentAndPicksMinimum) {
  const auto ts = random_set(2, 2, 12, 9);
  HyperGrid grid;
  auto cands = grid.candidates();
  EXPECT_EQ(cands.size(), 100u);
  const auto a = loocv_select(ts, cands, LooObjective::kSquaredError, 1);
  std::mt19937 rng(3);
  std::shuffle(cands.begin(), cands.end(), rng);
  const auto b = loocv_select(ts, cands, LooObjective::kSquaredError, 4);
  EXPECT_EQ(a.kernel, b.kernel);
  EXPECT_EQ(a.noise_variance, b.noise_variance);
  EXPECT_EQ(a.score, b.score);
  EXPECT_EQ(*std::min_element(b.scores.begin(), b.scores.end()), b.score);
  for (std::size_t i = 0; i < cands.size(); ++i) EXPECT_EQ(b.scores[i], loocv_score(ts, cands[i]));
}

TEST(Loo, TiesPreferLargerLengthScaleThenSmallerVarianceThenNoise) {
  // Zero outputs score 0 for every candidate, so only the tie-break decides.
  auto base = random_set(2, 1, 6, 10);
  TrainingSet ts(base.inputs(), Eigen::MatrixXd::Zero(2, 6), 1, base.input_scales(), Eigen::Vector2d::Ones(), 1.0);
  const std::vector<HyperCandidate> cands = {{{2.0, 1.0}, 0.1}, {{1.0, 4.0}, 0.1}, {{0.5, 4.0}, 0.1},
                                             {{0.5, 4.0}, 0.01}, {{0.5, 2.0}, 0.001}};
  const auto sel = loocv_select(ts, cands);
  EXPECT_EQ(sel.kernel, (KernelParams{0.5, 4.0}));
  EXPECT_EQ(sel.noise_variance, 0.01);
}

TEST(Loo, ObjectiveNames) {
  EXPECT_EQ(parse_loo_objective("squared_error"), LooObjective::kSquaredError);
  EXPECT_EQ(parse_loo_objective("nlpd"), LooObjective::kNegLogPredictiveDensity);
  EXPECT_EQ(to_string(LooObjective::kNegLogPredictiveDensity), "nlpd");
  EXPECT_THROW(parse_loo_objective("mse"), ConfigError);
  EXPECT_THROW(loocv_select(random_set(1, 1, 4, 1), {}), DomainError);
}

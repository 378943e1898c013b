#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gpkmd/error.hpp"
#include "gpkmd/ode.hpp"

using namespace gpkmd;

TEST(Ode, ExponentialDecay) {
  const OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& d) { d = -0.7 * y; };
  std::vector<double> times;
  for (int i = 0; i <= 50; ++i) times.push_back(0.1 * i);
  OdeStats stats;
  const auto y = integrate_dense(rhs, 0.0, Eigen::VectorXd::Constant(1, 2.0), times, {}, &stats);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(y(0, static_cast<Eigen::Index>(i)), 2.0 * std::exp(-0.7 * times[i]), 1e-8);
  }
  EXPECT_GT(stats.accepted, 0u);
  EXPECT_EQ(y(0, 0), 2.0);
}

TEST(Ode, HarmonicOscillatorDenseOutput) {
  const double w = 3.0;
  const OdeRhs rhs = [w](double, const Eigen::VectorXd& y, Eigen::VectorXd& d) {
    d.resize(2);
    d << y(1), -w * w * y(0);
  };
  std::vector<double> times;
  for (int i = 0; i <= 400; ++i) times.push_back(0.025 * i);  // many samples per step
  const auto y = integrate_dense(rhs, 0.0, Eigen::Vector2d(1.0, 0.0), times);
  double worst = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    worst = std::max(worst, std::abs(y(0, static_cast<Eigen::Index>(i)) - std::cos(w * times[i])));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Ode, TimeDependentRhs) {
  const OdeRhs rhs = [](double t, const Eigen::VectorXd&, Eigen::VectorXd& d) { d = Eigen::VectorXd::Constant(1, std::cos(t)); };
  const std::vector<double> times = {0.0, 1.0, 2.5};
  const auto y = integrate_dense(rhs, 0.0, Eigen::VectorXd::Zero(1), times);
  EXPECT_NEAR(y(0, 2), std::sin(2.5), 1e-8);
}

TEST(Ode, StepperStaysWithinLimit) {
  const OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& d) { d = y; };
  DormandPrince45 dp(rhs, 0.0, Eigen::VectorXd::Ones(1));
  while (dp.t() < 1.0) {
    dp.step(1.0);
    ASSERT_LE(dp.t(), 1.0);
    ASSERT_LT(dp.t_prev(), dp.t());
    const double mid = 0.5 * (dp.t_prev() + dp.t());
    EXPECT_NEAR(dp.interpolate(mid)(0), std::exp(mid), 1e-7 * std::exp(mid));
  }
  EXPECT_NEAR(dp.y()(0), std::exp(1.0), 1e-7);
}

TEST(Ode, BlowUpRaisesIntegrationError) {
  // y' = y^2, y(0) = 1 escapes to infinity at t = 1.
  const OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& d) { d = y.array().square(); };
  const std::vector<double> times = {0.0, 0.5, 2.0};
  try {
    integrate_dense(rhs, 0.0, Eigen::VectorXd::Ones(1), times);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.last_valid_time(), 0.5);
    EXPECT_LT(e.last_valid_time(), 1.01);
  }
}

TEST(Ode, RejectsDescendingTimes) {
  const OdeRhs rhs = [](double, const Eigen::VectorXd& y, Eigen::VectorXd& d) { d = -y; };
  const std::vector<double> times = {0.0, 1.0, 0.5};
  EXPECT_THROW(integrate_dense(rhs, 0.0, Eigen::VectorXd::Ones(1), times), DomainError);
}

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>

#include <Eigen/Core>

namespace gpkmd {

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

/// Dormand-Prince 5(4) stepper with PI step-size control and the
/// fourth-order continuous extension for dense output.
class DormandPrince45 {
 public:
  DormandPrince45(OdeRhs rhs, double t0, Eigen::VectorXd y0, OdeOptions options = {});

  /// Advances by one accepted step, not beyond t_limit. Throws
  /// IntegrationError on step-size underflow or a non-finite state.
  void step(double t_limit);

  /// Dense output on [t_prev(), t()]; valid after the first step.
  Eigen::VectorXd interpolate(double t) const;

  double t() const noexcept { return t_; }
  double t_prev() const noexcept { return t_old_; }
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const OdeStats& stats() const noexcept { return stats_; }

 private:
  void eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt);
  double initial_step();

  OdeRhs rhs_;
  OdeOptions opt_;
  double t_;
  double t_old_;
  double h_ = 0.0;
  double last_h_ = 0.0;
  double err_old_ = 1e-4;
  bool reject_last_ = false;
  Eigen::VectorXd y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, y_stage_, y_new_;
  Eigen::VectorXd cont_[5];
  OdeStats stats_;
};

/// Integrates from t0 and samples the dense interpolant at `times`
/// (ascending, all >= t0). Column i of the result is y(times[i]).
Eigen::MatrixXd integrate_dense(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0,
                                std::span<const double> times, const OdeOptions& options = {},
                                OdeStats* stats = nullptr);

}  // namespace gpkmd

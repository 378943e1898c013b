#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpkmd/embedding.hpp"

namespace gpkmd {

/// Gaussian-kernel hyperparameters: sigma_f^2 and the shared length scale.
struct KernelParams {
  double signal_variance = 1.0;
  double length_scale = 1.0;

  /// Throws DomainError unless both are strictly positive and finite.
  void validate() const;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// Inter-task covariance K^g and per-task observation noise variances (diag of D).
struct TaskCovariance {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd noise_variances;

  /// K^g = diag(1/ss_i) with one noise variance shared by all tasks.
  static TaskCovariance from_output_scales(const Eigen::VectorXd& output_scales,
                                           double noise_variance);
  /// Throws DomainError on asymmetry, negative eigenvalues or negative noise.
  void validate() const;
  Eigen::Index tasks() const noexcept { return matrix.rows(); }
};

/// sigma_f^2 exp(-|a/s - b/s|^2 / (2 l^2)).
double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& z_a,
                   const Eigen::Ref<const Eigen::VectorXd>& z_b, const KernelParams& params,
                   const Eigen::Ref<const Eigen::VectorXd>& scales);

/// K(z, z) over the training inputs.
Eigen::MatrixXd gram_matrix(const TrainingSet& ts, const KernelParams& params);

/// kappa(z, z_star): kernel values between every training input and z_star.
Eigen::VectorXd kernel_vector(const TrainingSet& ts, const KernelParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& z_star);

/// Fitted multi-task GP.
///
/// The system matrix K(z,z) (x) K^g + I (x) D is ordered so that block (k, l)
/// is K_kl K^g, which makes vec(H) (column-major H) line up with the stacked
/// outputs y = [y_p; ...; y_N].
class GpModel {
 public:
  const TrainingSet& training() const noexcept { return training_; }
  const KernelParams& kernel() const noexcept { return kernel_; }
  const TaskCovariance& tasks() const noexcept { return tasks_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  /// H, M x n, with vec(H) = [K (x) K^g + I (x) D]^{-1} y.
  const Eigen::MatrixXd& weight_h() const noexcept { return weight_h_; }
  /// B = K^g H.
  const Eigen::MatrixXd& weight_b() const noexcept { return weight_b_; }
  /// Diagonal jitter that had to be added to factorize the system (0 normally).
  double jitter() const noexcept { return jitter_; }

  /// Solves the full system matrix against `rhs` (Mn rows) with the stored factor.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const { return factor_.solve(rhs); }

 private:
  friend GpModel fit(const TrainingSet&, const KernelParams&, const TaskCovariance&);
  GpModel(TrainingSet ts, KernelParams kernel, TaskCovariance tasks)
      : training_(std::move(ts)), kernel_(kernel), tasks_(std::move(tasks)) {}

  TrainingSet training_;
  KernelParams kernel_;
  TaskCovariance tasks_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd weight_h_;
  Eigen::MatrixXd weight_b_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double jitter_ = 0.0;
};

/// Dense K (x) K^g + I (x) D.
Eigen::MatrixXd system_matrix(const Eigen::MatrixXd& gram, const TaskCovariance& tasks);

/// Cholesky of the system matrix with a jitter ladder (1e-12 sigma_f^2, x10,
/// at most four retries). Throws FitError with a condition estimate.
GpModel fit(const TrainingSet& ts, const KernelParams& params, const TaskCovariance& tasks);

/// Predictive mean B kappa(z, z_star).
Eigen::VectorXd predict_mean(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& z_star);

/// Predictive covariance
/// kappa(z*, z*) K^g - (kappa* (x) K^g)^T [K (x) K^g + I (x) D]^{-1} (kappa* (x) K^g),
/// symmetrized.
Eigen::MatrixXd predict_cov(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& z_star);

/// One hyperparameter candidate: kernel plus a noise variance shared by all tasks.
struct HyperCandidate {
  KernelParams kernel;
  double noise_variance = 0.0;
  friend bool operator==(const HyperCandidate&, const HyperCandidate&) = default;
};

/// Cartesian grid of candidates.
struct HyperGrid {
  std::vector<double> signal_variances{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> length_scales{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> noise_variances{1e-4, 1e-3, 1e-2, 1e-1};

  std::vector<HyperCandidate> candidates() const;
};

enum class LooObjective {
  kSquaredError,            // mean squared held-out error on scaled outputs
  kNegLogPredictiveDensity  // mean negative log predictive density of held-out pairs
};

std::string_view to_string(LooObjective objective);
/// Accepts "squared_error" and "nlpd". Throws ConfigError otherwise.
LooObjective parse_loo_objective(std::string_view name);

/// Leave-one-out score of a candidate. Each held-out unit is one training
/// pair (all M outputs of y_k); residuals come from the block form of the
/// inverse-matrix identity, so no refit is needed.
double loocv_score(const TrainingSet& ts, const HyperCandidate& candidate,
                   LooObjective objective = LooObjective::kSquaredError);

struct LooSelection {
  KernelParams kernel;
  TaskCovariance tasks;
  double noise_variance = 0.0;
  double score = 0.0;
  LooObjective objective = LooObjective::kSquaredError;
  std::vector<double> scores;  // one per candidate, in input order
};

/// Picks the candidate minimising the LOO objective. Ties go to the larger
/// length scale, then the smaller signal variance, then the smaller noise
/// variance. Candidates are scored in parallel; the result does not depend
/// on evaluation order. Throws DomainError on an empty grid.
LooSelection loocv_select(const TrainingSet& ts, const std::vector<HyperCandidate>& grid,
                          LooObjective objective = LooObjective::kSquaredError,
                          unsigned workers = 0);

}  // namespace gpkmd

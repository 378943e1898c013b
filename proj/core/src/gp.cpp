#include "gpkmd/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "gpkmd/error.hpp"
#include "parallel.hpp"

namespace gpkmd {
namespace {

constexpr double kJitterStart = 1e-12;
constexpr int kJitterRetries = 4;

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  bool ok = false;
};

// Cholesky with the jitter ladder: 0, then 1e-12, 1e-11, ... times sigma_f^2.
Factorization factorize(const Eigen::MatrixXd& system, double signal_variance) {
  Factorization f;
  f.llt.compute(system);
  if (f.llt.info() == Eigen::Success) {
    f.ok = true;
    return f;
  }
  double jitter = kJitterStart * signal_variance;
  for (int attempt = 0; attempt < kJitterRetries; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd shifted = system;
    shifted.diagonal().array() += jitter;
    f.llt.compute(shifted);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      f.ok = true;
      return f;
    }
  }
  return f;
}

double condition_estimate(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
  const auto abs = eig.eigenvalues().cwiseAbs();
  const double lo = abs.minCoeff();
  return lo > 0.0 ? abs.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd scaled_inputs(const TrainingSet& ts) {
  return ts.input_scales().cwiseInverse().asDiagonal() * ts.inputs();
}

Eigen::VectorXd stacked_outputs(const TrainingSet& ts) {
  return Eigen::Map<const Eigen::VectorXd>(ts.outputs().data(), ts.outputs().size());
}

}  // namespace

void KernelParams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw DomainError("signal variance must be positive and finite");
  }
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw DomainError("length scale must be positive and finite");
  }
}

TaskCovariance TaskCovariance::from_output_scales(const Eigen::VectorXd& output_scales,
                                                  double noise_variance) {
  if (!(noise_variance >= 0.0)) throw DomainError("noise variance must be non-negative");
  TaskCovariance t;
  t.matrix = output_scales.cwiseInverse().asDiagonal();
  t.noise_variances = Eigen::VectorXd::Constant(output_scales.size(), noise_variance);
  return t;
}

void TaskCovariance::validate() const {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw DomainError("task covariance must be a non-empty square matrix");
  }
  if (noise_variances.size() != matrix.rows()) {
    throw DomainError("noise variance count does not match task count");
  }
  if ((noise_variances.array() < 0.0).any() || !noise_variances.allFinite()) {
    throw DomainError("noise variances must be non-negative");
  }
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if (!(matrix - matrix.transpose()).isZero(1e-12 * scale)) {
    throw DomainError("task covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw DomainError("task covariance must be positive semi-definite");
  }
}

double kernel_eval(const Eigen::Ref<const Eigen::VectorXd>& z_a,
                   const Eigen::Ref<const Eigen::VectorXd>& z_b, const KernelParams& params,
                   const Eigen::Ref<const Eigen::VectorXd>& scales) {
  if (z_a.size() != z_b.size() || z_a.size() != scales.size()) {
    throw DomainError("kernel_eval: dimension mismatch");
  }
  const double d2 = (z_a.cwiseQuotient(scales) - z_b.cwiseQuotient(scales)).squaredNorm();
  return params.signal_variance *
         std::exp(-d2 / (2.0 * params.length_scale * params.length_scale));
}

Eigen::MatrixXd gram_matrix(const TrainingSet& ts, const KernelParams& params) {
  params.validate();
  const Eigen::MatrixXd x = scaled_inputs(ts);
  const auto n = x.cols();
  const double inv_two_l2 = 1.0 / (2.0 * params.length_scale * params.length_scale);
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = params.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = params.signal_variance * std::exp(-(x.col(i) - x.col(j)).squaredNorm() * inv_two_l2);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::VectorXd kernel_vector(const TrainingSet& ts, const KernelParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& z_star) {
  if (z_star.size() != ts.input_dimension()) {
    throw DomainError("test input has dimension " + std::to_string(z_star.size()) +
                      ", expected " + std::to_string(ts.input_dimension()));
  }
  Eigen::VectorXd kappa(ts.size());
  for (Eigen::Index k = 0; k < ts.size(); ++k) {
    kappa(k) = kernel_eval(ts.inputs().col(k), z_star, params, ts.input_scales());
  }
  return kappa;
}

Eigen::MatrixXd system_matrix(const Eigen::MatrixXd& gram, const TaskCovariance& tasks) {
  const auto n = gram.rows();
  const auto m = tasks.tasks();
  Eigen::MatrixXd a(m * n, m * n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      a.block(k * m, l * m, m, m) = gram(k, l) * tasks.matrix;
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    a.block(k * m, k * m, m, m).diagonal() += tasks.noise_variances;
  }
  return a;
}

GpModel fit(const TrainingSet& ts, const KernelParams& params, const TaskCovariance& tasks) {
  params.validate();
  tasks.validate();
  if (tasks.tasks() != ts.tasks()) {
    throw DomainError("task covariance is " + std::to_string(tasks.tasks()) +
                      "-dimensional but the training set has " + std::to_string(ts.tasks()) +
                      " tasks");
  }
  GpModel model(ts, params, tasks);
  model.gram_ = gram_matrix(ts, params);
  const Eigen::MatrixXd system = system_matrix(model.gram_, tasks);
  auto f = factorize(system, params.signal_variance);
  if (!f.ok) {
    const double cond = condition_estimate(system);
    throw FitError("GP system matrix is numerically singular (condition estimate " +
                       std::to_string(cond) + ")",
                   cond);
  }
  model.factor_ = std::move(f.llt);
  model.jitter_ = f.jitter;

  const Eigen::VectorXd h = model.factor_.solve(stacked_outputs(ts));
  model.weight_h_ = Eigen::Map<const Eigen::MatrixXd>(h.data(), ts.tasks(), ts.size());
  model.weight_b_ = tasks.matrix * model.weight_h_;
  return model;
}

Eigen::VectorXd predict_mean(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& z_star) {
  return model.weight_b() * kernel_vector(model.training(), model.kernel(), z_star);
}

Eigen::MatrixXd predict_cov(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& z_star) {
  const auto& ts = model.training();
  const Eigen::VectorXd kappa = kernel_vector(ts, model.kernel(), z_star);
  const double k_star = kernel_eval(z_star, z_star, model.kernel(), ts.input_scales());
  const auto m = ts.tasks();
  const auto& kg = model.tasks().matrix;

  // Q = kappa (x) K^g, an (Mn x M) stack of kappa_k K^g blocks.
  Eigen::MatrixXd q(m * ts.size(), m);
  for (Eigen::Index k = 0; k < ts.size(); ++k) q.block(k * m, 0, m, m) = kappa(k) * kg;

  Eigen::MatrixXd cov = k_star * kg - q.transpose() * model.solve(q);
  return 0.5 * (cov + cov.transpose());
}

std::vector<HyperCandidate> HyperGrid::candidates() const {
  std::vector<HyperCandidate> out;
  out.reserve(signal_variances.size() * length_scales.size() * noise_variances.size());
  for (double sf2 : signal_variances) {
    for (double ell : length_scales) {
      for (double noise : noise_variances) out.push_back({{sf2, ell}, noise});
    }
  }
  return out;
}

std::string_view to_string(LooObjective objective) {
  switch (objective) {
    case LooObjective::kSquaredError:
      return "squared_error";
    case LooObjective::kNegLogPredictiveDensity:
      return "nlpd";
  }
  return "unknown";
}

LooObjective parse_loo_objective(std::string_view name) {
  if (name == "squared_error") return LooObjective::kSquaredError;
  if (name == "nlpd") return LooObjective::kNegLogPredictiveDensity;
  throw ConfigError("unknown LOO objective '" + std::string(name) +
                    "' (expected squared_error or nlpd)");
}

double loocv_score(const TrainingSet& ts, const HyperCandidate& candidate, LooObjective objective) {
  candidate.kernel.validate();
  const auto tasks = TaskCovariance::from_output_scales(ts.output_scales(), candidate.noise_variance);
  const Eigen::MatrixXd system = system_matrix(gram_matrix(ts, candidate.kernel), tasks);
  const auto f = factorize(system, candidate.kernel.signal_variance);
  if (!f.ok) return std::numeric_limits<double>::infinity();

  const auto m = ts.tasks();
  const auto n = ts.size();
  const Eigen::MatrixXd inverse = f.llt.solve(Eigen::MatrixXd::Identity(m * n, m * n));
  const Eigen::VectorXd alpha = inverse * stacked_outputs(ts);
  const Eigen::ArrayXd inv_scale = ts.output_scales().cwiseInverse().array();

  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::MatrixXd precision = inverse.block(k * m, k * m, m, m);
    const Eigen::LDLT<Eigen::MatrixXd> block(precision);
    if (block.info() != Eigen::Success || !block.isPositive()) {
      return std::numeric_limits<double>::infinity();
    }
    // y_k minus the held-out predictive mean.
    const Eigen::VectorXd residual = block.solve(alpha.segment(k * m, m));
    if (objective == LooObjective::kSquaredError) {
      total += (residual.array() * inv_scale).square().sum();
    } else {
      const double log_det_precision = block.vectorD().array().log().sum();
      total += 0.5 * (residual.dot(precision * residual) - log_det_precision +
                      static_cast<double>(m) * std::log(2.0 * std::numbers::pi));
    }
  }
  const double denom = objective == LooObjective::kSquaredError ? static_cast<double>(m * n)
                                                                : static_cast<double>(n);
  const double score = total / denom;
  return std::isfinite(score) ? score : std::numeric_limits<double>::infinity();
}

LooSelection loocv_select(const TrainingSet& ts, const std::vector<HyperCandidate>& grid,
                          LooObjective objective, unsigned workers) {
  if (grid.empty()) throw DomainError("hyperparameter grid is empty");
  std::vector<double> scores(grid.size());
  detail::parallel_for(grid.size(), workers,
                       [&](std::size_t i) { scores[i] = loocv_score(ts, grid[i], objective); });

  // Total order: score, then larger length scale, smaller sigma_f^2, smaller noise.
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    const auto& ga = grid[a];
    const auto& gb = grid[b];
    if (ga.kernel.length_scale != gb.kernel.length_scale) {
      return ga.kernel.length_scale > gb.kernel.length_scale;
    }
    if (ga.kernel.signal_variance != gb.kernel.signal_variance) {
      return ga.kernel.signal_variance < gb.kernel.signal_variance;
    }
    return ga.noise_variance < gb.noise_variance;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (better(i, best)) best = i;
  }
  if (!std::isfinite(scores[best])) {
    throw FitError("no hyperparameter candidate gave a factorizable GP system",
                   std::numeric_limits<double>::infinity());
  }

  LooSelection sel;
  sel.kernel = grid[best].kernel;
  sel.noise_variance = grid[best].noise_variance;
  sel.tasks = TaskCovariance::from_output_scales(ts.output_scales(), sel.noise_variance);
  sel.score = scores[best];
  sel.objective = objective;
  sel.scores = std::move(scores);
  return sel;
}

}  // namespace gpkmd

#include "gpkmd/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "gpkmd/error.hpp"

namespace gpkmd {
namespace {

bool ritz_order(const std::complex<double>& a, const std::complex<double>& b) {
  const double ma = std::abs(a);
  const double mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

double min_pairwise_distance(const ComplexVector& lambdas) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    for (Eigen::Index j = i + 1; j < lambdas.size(); ++j) {
      best = std::min(best, std::abs(lambdas(i) - lambdas(j)));
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd latent_mean_matrix(const GpModel& model) {
  return model.weight_b() * model.gram();
}

CompanionVector companion_vector(const GpModel& model) {
  const auto& ts = model.training();
  if (!ts.next_input()) {
    throw DomainError("training set has no next input z_{N+1}; build it from a snapshot sequence");
  }
  const Eigen::VectorXd kappa = kernel_vector(ts, model.kernel(), *ts.next_input());
  const Eigen::MatrixXd& k = model.gram();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  const Eigen::VectorXd sv = eig.eigenvalues().cwiseAbs();
  const double s_max = sv.maxCoeff();
  const double s_min = sv.minCoeff();

  CompanionVector out;
  out.condition_number = s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();
  if (out.condition_number <= kPseudoInverseCondition) {
    out.coefficients = k.ldlt().solve(kappa);
    return out;
  }

  // Moore-Penrose pseudo-inverse through the symmetric eigendecomposition.
  out.used_pseudo_inverse = true;
  const Eigen::MatrixXd& u = eig.eigenvectors();
  Eigen::VectorXd projected = u.transpose() * kappa;
  const double cutoff = kSingularValueCutoff * s_max;
  for (Eigen::Index i = 0; i < projected.size(); ++i) {
    const double lam = eig.eigenvalues()(i);
    projected(i) = std::abs(lam) > cutoff ? projected(i) / lam : 0.0;
  }
  out.coefficients = u * projected;
  return out;
}

Eigen::MatrixXd companion_matrix(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  const auto n = coeffs.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  if (n > 1) c.diagonal(-1).setOnes();
  c.col(n - 1) = coeffs;
  return c;
}

ComplexVector ritz_values(const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
  if (coeffs.size() < 1) throw DomainError("companion vector is empty");
  ComplexVector lambdas;
  if (coeffs.size() == 1) {
    lambdas = ComplexVector::Constant(1, coeffs(0));
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion_matrix(coeffs), false);
    if (solver.info() != Eigen::Success) {
      throw Error("eigenvalue iteration for the companion matrix did not converge");
    }
    lambdas = solver.eigenvalues();
  }
  std::sort(lambdas.data(), lambdas.data() + lambdas.size(), ritz_order);
  return lambdas;
}

ComplexMatrix vandermonde(const ComplexVector& lambdas) {
  const auto n = lambdas.size();
  ComplexMatrix t(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    std::complex<double> power = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      t(j, k) = power;
      power *= lambdas(j);
    }
  }
  return t;
}

ComplexMatrix ritz_vectors(const Eigen::MatrixXd& latent_means, const ComplexVector& lambdas) {
  const auto n = lambdas.size();
  if (latent_means.cols() != n) {
    throw DomainError("latent mean matrix has " + std::to_string(latent_means.cols()) +
                      " columns but there are " + std::to_string(n) + " Ritz values");
  }
  const double gap = min_pairwise_distance(lambdas);
  if (gap < kDistinctRitzTolerance) {
    throw DegenerateSpectrumError(
        "two Ritz values are closer than 1e-10 (distance " + std::to_string(gap) +
        "); perturb the data or use a smaller analysis window");
  }

  // T = S * T_scaled with S = diag(max_k |lambda_j|^k), so V = W S^{-1} where W T_scaled = G.
  Eigen::VectorXd row_scale(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    row_scale(j) = std::max(1.0, std::pow(std::abs(lambdas(j)), static_cast<double>(n - 1)));
  }
  const ComplexMatrix t_scaled = row_scale.cwiseInverse().cast<std::complex<double>>().asDiagonal() *
                                 vandermonde(lambdas);
  const ComplexMatrix lhs = t_scaled.transpose();
  const ComplexMatrix rhs = latent_means.transpose().cast<std::complex<double>>();

  ComplexMatrix w_transposed;
  Eigen::PartialPivLU<ComplexMatrix> lu(lhs);
  if (lu.rcond() * kPseudoInverseCondition >= 1.0) {
    w_transposed = lu.solve(rhs);
  } else {
    Eigen::BDCSVD<ComplexMatrix> svd(lhs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kSingularValueCutoff);
    w_transposed = svd.solve(rhs);
  }
  return w_transposed.transpose() * row_scale.cwiseInverse().cast<std::complex<double>>().asDiagonal();
}

KoopmanDecomposition decompose(const GpModel& model) {
  const auto& ts = model.training();
  KoopmanDecomposition dec;
  dec.latent_means = latent_mean_matrix(model);
  const auto companion = companion_vector(model);
  dec.companion_coeffs = companion.coefficients;
  dec.used_pseudo_inverse = companion.used_pseudo_inverse;
  dec.ritz_values = ritz_values(dec.companion_coeffs);
  dec.ritz_vectors = ritz_vectors(dec.latent_means, dec.ritz_values);
  dec.outputs = ts.outputs();
  dec.residuals = dec.outputs - dec.latent_means;
  dec.next_mean = predict_mean(model, *ts.next_input());
  dec.sample_period = ts.sample_period();
  dec.embedding_order = ts.embedding_order();
  return dec;
}

double vandermonde_residual(const KoopmanDecomposition& dec) {
  const ComplexMatrix diff =
      dec.ritz_vectors * vandermonde(dec.ritz_values) - dec.latent_means.cast<std::complex<double>>();
  const double scale = dec.latent_means.norm();
  return scale > 0.0 ? diff.norm() / scale : diff.norm();
}

namespace {

ComplexVector expansion(const KoopmanDecomposition& dec, Eigen::Index k) {
  ComplexVector powers = ComplexVector::Ones(dec.size());
  for (Eigen::Index step = 0; step < k; ++step) powers = powers.cwiseProduct(dec.ritz_values);
  return dec.ritz_vectors * powers;
}

}  // namespace

Reconstruction reconstruct(const KoopmanDecomposition& dec, Eigen::Index k) {
  if (k < 0 || k >= dec.size()) {
    throw DomainError("reconstruction step " + std::to_string(k) + " outside [0, " +
                      std::to_string(dec.size() - 1) + "]");
  }
  const ComplexVector sum = expansion(dec, k);
  Reconstruction r;
  r.value = sum.real();
  r.residual = dec.outputs.col(k) - r.value;
  r.max_imag = sum.imag().cwiseAbs().maxCoeff();
  return r;
}

Eigen::VectorXd predict_next(const KoopmanDecomposition& dec) {
  return expansion(dec, dec.size()).real();
}

std::optional<double> mode_period(std::complex<double> lambda, double sample_period) {
  if (lambda == 0.0) return std::nullopt;
  const double angle = std::arg(lambda);  // Im of the principal log
  if (std::abs(angle) < 1e-10) return std::nullopt;
  return 2.0 * std::numbers::pi * sample_period / angle;
}

ModeKind classify_mode(std::complex<double> lambda) {
  if (lambda == 0.0) return ModeKind::kDecayed;
  return std::abs(std::arg(lambda)) < 1e-10 ? ModeKind::kNonOscillatory : ModeKind::kOscillatory;
}

ModeShape mode_shape(const KoopmanDecomposition& dec, Eigen::Index mode, Eigen::Index reference_task) {
  if (mode < 0 || mode >= dec.size()) throw DomainError("mode index out of range");
  if (reference_task < 0 || reference_task >= dec.tasks()) {
    throw DomainError("reference task out of range");
  }
  const auto v = dec.ritz_vectors.col(mode);
  const auto ref = v(reference_task);
  if (std::abs(ref) < 1e-12) {
    throw ReferenceDegenerateError("reference component of mode " + std::to_string(mode) +
                                   " is numerically zero; choose another reference task");
  }
  ModeShape shape;
  shape.amplitudes = v.cwiseAbs();
  shape.phases.resize(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) shape.phases(i) = std::arg(v(i) / ref);
  shape.phases(reference_task) = 0.0;
  // std::arg returns -pi for a negative real with a -0 imaginary part; fold into (-pi, pi].
  for (auto& a : shape.phases) {
    if (a <= -std::numbers::pi) a = std::numbers::pi;
  }
  return shape;
}

std::vector<ModeStats> mode_table(const KoopmanDecomposition& dec,
                                  std::optional<Eigen::Index> reference_task) {
  const Eigen::Index ref = reference_task.value_or(dec.tasks() - 1);
  if (ref < 0 || ref >= dec.tasks()) throw DomainError("reference task out of range");

  std::vector<ModeStats> rows;
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    const auto lambda = dec.ritz_values(j);
    if (lambda.imag() < 0.0) {
      bool has_partner = false;
      for (Eigen::Index i = 0; i < dec.size() && !has_partner; ++i) {
        has_partner = i != j && std::abs(dec.ritz_values(i) - std::conj(lambda)) <= 1e-8;
      }
      if (has_partner) continue;
    }
    ModeStats row;
    row.index = j;
    row.ritz_value = lambda;
    row.norm = dec.ritz_vectors.col(j).norm();
    row.growth_rate = std::abs(lambda);
    row.kind = classify_mode(lambda);
    if (row.kind == ModeKind::kOscillatory) row.period = mode_period(lambda, dec.sample_period);
    row.amplitudes = dec.ritz_vectors.col(j).cwiseAbs();
    try {
      row.phases = mode_shape(dec, j, ref).phases;
    } catch (const ReferenceDegenerateError&) {
      row.phases = Eigen::VectorXd::Constant(dec.tasks(), std::numeric_limits<double>::quiet_NaN());
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ModeStats& a, const ModeStats& b) { return a.norm > b.norm; });
  return rows;
}

}  // namespace gpkmd

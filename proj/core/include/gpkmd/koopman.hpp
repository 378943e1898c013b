#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gpkmd/gp.hpp"

namespace gpkmd {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Condition number above which linear solves switch to truncated SVD.
inline constexpr double kPseudoInverseCondition = 1e12;
/// Relative singular-value cutoff of the truncated pseudo-inverse.
inline constexpr double kSingularValueCutoff = 1e-12;
/// Ritz values closer than this are treated as coincident.
inline constexpr double kDistinctRitzTolerance = 1e-10;

/// Regression coefficients of the next predictive mean on the latent means.
struct CompanionVector {
  Eigen::VectorXd coefficients;
  double condition_number = 0.0;
  bool used_pseudo_inverse = false;
};

/// Ritz values/vectors extracted from a fitted GP, plus the bookkeeping needed
/// to reconstruct the output expansion y_{k+p} = sum_j lambda_j^k v_j + r_k.
struct KoopmanDecomposition {
  ComplexVector ritz_values;        // n, sorted by |lambda| desc, then Re desc, then Im desc
  ComplexMatrix ritz_vectors;       // M x n, column j pairs with ritz_values(j)
  Eigen::MatrixXd latent_means;     // G_GP, M x n
  Eigen::VectorXd companion_coeffs; // c_GP, n
  Eigen::MatrixXd outputs;          // training outputs y_p..y_N, M x n
  Eigen::MatrixXd residuals;        // column k is r_k = y_{k+p} - G_GP[:, k]
  Eigen::VectorXd next_mean;        // predictive mean at z_{N+1}
  double sample_period = 0.0;
  int embedding_order = 0;
  bool used_pseudo_inverse = false;

  Eigen::Index size() const noexcept { return ritz_values.size(); }
  Eigen::Index tasks() const noexcept { return latent_means.rows(); }
};

/// G_GP = B K(z, z); column k is the latent mean at training input z_{p+k}.
Eigen::MatrixXd latent_mean_matrix(const GpModel& model);

/// c_GP solving K(z,z) c = kappa(z, z_{N+1}). Uses a direct solve when
/// cond(K) <= 1e12 and the truncated (1e-12 sigma_max) pseudo-inverse
/// otherwise. The companion matrix is n-dimensional with coefficients
/// c_0..c_{n-1}; there is no c_n.
CompanionVector companion_vector(const GpModel& model);

/// Companion matrix: ones on the subdiagonal, last column = coeffs.
Eigen::MatrixXd companion_matrix(const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// Eigenvalues of the companion matrix, sorted as in KoopmanDecomposition.
ComplexVector ritz_values(const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// Vandermonde matrix T with T(j, k) = lambda_j^k, k = 0..n-1.
ComplexMatrix vandermonde(const ComplexVector& lambdas);

/// V such that V T = G. Rows of T are scaled by max_k |lambda_j|^k before a
/// pivoted LU solve; falls back to SVD least squares when the scaled
/// Vandermonde condition exceeds 1e12. Throws DegenerateSpectrumError when
/// two Ritz values are closer than 1e-10.
ComplexMatrix ritz_vectors(const Eigen::MatrixXd& latent_means, const ComplexVector& lambdas);

/// Full pipeline over a fitted model. Requires the training set to carry
/// z_{N+1} (sets built with build_training_set do).
KoopmanDecomposition decompose(const GpModel& model);

/// ||V T - G|| / ||G|| (Frobenius).
double vandermonde_residual(const KoopmanDecomposition& dec);

struct Reconstruction {
  Eigen::VectorXd value;     // Re sum_j lambda_j^k v_j
  Eigen::VectorXd residual;  // y_{k+p} - value
  double max_imag = 0.0;     // largest |Im| dropped from the sum
};

/// Expansion at step k, 0 <= k <= n-1. Throws DomainError otherwise.
Reconstruction reconstruct(const KoopmanDecomposition& dec, Eigen::Index k);

/// The expansion one step past the last latent mean (k = n): a prediction,
/// not a residual.
Eigen::VectorXd predict_next(const KoopmanDecomposition& dec);

enum class ModeKind { kOscillatory, kNonOscillatory, kDecayed };

struct ModeStats {
  Eigen::Index index = 0;            // position in ritz_values
  std::complex<double> ritz_value;
  double norm = 0.0;                 // ||v_j||
  double growth_rate = 0.0;          // |lambda_j|
  std::optional<double> period;      // seconds; empty unless oscillatory
  ModeKind kind = ModeKind::kOscillatory;
  Eigen::VectorXd amplitudes;        // |v_ji|
  Eigen::VectorXd phases;            // arg(v_ji / v_j,ref) in (-pi, pi]; NaN if ref degenerate
};

/// T_j = 2 pi T / Im(ln lambda), principal branch. Empty when
/// |Im ln lambda| < 1e-10 or lambda == 0.
std::optional<double> mode_period(std::complex<double> lambda, double sample_period);
ModeKind classify_mode(std::complex<double> lambda);

struct ModeShape {
  Eigen::VectorXd amplitudes;
  Eigen::VectorXd phases;
};

/// Amplitudes |v_ji| and phases relative to `reference_task` (0-based).
/// Throws ReferenceDegenerateError when |v_j,ref| < 1e-12, DomainError on
/// bad indices.
ModeShape mode_shape(const KoopmanDecomposition& dec, Eigen::Index mode, Eigen::Index reference_task);

/// One row per mode with conjugate pairs collapsed to the Im > 0 member,
/// sorted by descending norm. Phases are relative to `reference_task`
/// (defaults to the last task).
std::vector<ModeStats> mode_table(const KoopmanDecomposition& dec,
                                  std::optional<Eigen::Index> reference_task = std::nullopt);

}  // namespace gpkmd

#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpkmd/embedding.hpp"
#include "gpkmd/gp.hpp"
#include "gpkmd/koopman.hpp"

namespace gpkmd {

/// How to obtain GP hyperparameters for a decomposition.
struct HyperSettings {
  std::optional<HyperCandidate> fixed;  // used as-is when set
  HyperGrid grid;                       // searched by LOO-CV otherwise
  LooObjective objective = LooObjective::kSquaredError;
};

/// Selected (or fixed) hyperparameters plus the LOO score when searched.
struct HyperChoice {
  HyperCandidate candidate;
  std::optional<double> loo_score;
};

HyperChoice choose_hyperparameters(const TrainingSet& ts, const HyperSettings& settings,
                                   unsigned workers = 0);

/// Embedding, fit and decomposition in one call.
struct PipelineResult {
  HyperChoice hyper;
  KoopmanDecomposition decomposition;
};

PipelineResult run_pipeline(const SnapshotSequence& seq, int embedding_order,
                            const HyperSettings& settings, unsigned workers = 0);

struct MonteCarloOptions {
  int n_trials = 100;
  double noise_sigma = 0.1;
  std::uint64_t base_seed = 1;
  int embedding_order = kDefaultEmbeddingOrder;
  HyperSettings hyper;
  /// Number of dominant (largest-norm) reference modes to follow.
  int track_modes = 2;
  /// Reject a match farther than this from the reference Ritz value.
  double match_radius = 0.1;
  /// Re-run LOO-CV on every trial instead of freezing the first choice.
  bool reselect_per_trial = false;
  /// Task used as phase reference; defaults to the last task.
  std::optional<Eigen::Index> reference_task;
  unsigned workers = 0;
};

/// Seed of trial t, a deterministic function of (base_seed, t).
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

struct TrackedMode {
  bool matched = false;
  std::complex<double> ritz_value{};
  double growth_rate = std::numeric_limits<double>::quiet_NaN();
  double period = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd amplitudes;
  Eigen::VectorXd phases;
};

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;             // set when !ok
  std::vector<TrackedMode> modes;  // one per reference mode
  HyperCandidate hyper;
  double residual_rms = std::numeric_limits<double>::quiet_NaN();
  double vandermonde_residual = std::numeric_limits<double>::quiet_NaN();
};

struct ReferenceMode {
  std::complex<double> ritz_value;
  double norm = 0.0;
  double growth_rate = 0.0;
  std::optional<double> period;
};

struct MonteCarloRun {
  HyperChoice hyper;                    // frozen choice (first trial's when reselecting)
  std::vector<ReferenceMode> reference; // from the noise-free decomposition
  std::vector<TrialResult> trials;      // indexed by trial number
  Eigen::Index tasks = 0;
  Eigen::Index reference_task = 0;
  double sample_period = 0.0;
};

/// Repeats noise -> GP-KMD over seeded realizations of `clean`.
///
/// Hyperparameters come from `options.hyper.fixed` or are LOO-selected once
/// on trial 0's noisy data (on the clean data when sigma = 0) and frozen.
/// Reference modes are the `track_modes` largest-norm rows of the clean
/// decomposition; each trial's mode is the nearest Ritz value within
/// `match_radius`. Trial failures are recorded; throws Error when all fail.
MonteCarloRun run_trials(const SnapshotSequence& clean, const MonteCarloOptions& options);

struct StatSummary {
  std::size_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();  // mean - 1.96 sd
  double upper = std::numeric_limits<double>::quiet_NaN();  // mean + 1.96 sd
  double p025 = std::numeric_limits<double>::quiet_NaN();   // empirical 2.5th percentile
  double p975 = std::numeric_limits<double>::quiet_NaN();   // empirical 97.5th percentile
  double max = std::numeric_limits<double>::quiet_NaN();

  double half_width() const noexcept { return upper - mean; }
};

/// Circular summary of angles in (-pi, pi].
struct CircularSummary {
  std::size_t count = 0;
  double mean_direction = std::numeric_limits<double>::quiet_NaN();
  double resultant_length = std::numeric_limits<double>::quiet_NaN();
  double circular_stddev = std::numeric_limits<double>::quiet_NaN();  // sqrt(-2 ln R)
  double lower = std::numeric_limits<double>::quiet_NaN();  // mean - 1.96 sd, unwrapped
  double upper = std::numeric_limits<double>::quiet_NaN();
};

struct ModeSummary {
  std::complex<double> reference_value;
  std::size_t matched = 0;
  StatSummary growth_rate;
  StatSummary period;
  std::vector<StatSummary> amplitudes;
  std::vector<CircularSummary> phases;
  std::vector<bool> phase_unreliable;  // mean amplitude < 0.05 max mean amplitude
};

struct McSummary {
  std::size_t trial_count = 0;
  std::size_t failure_count = 0;
  std::vector<ModeSummary> modes;
};

/// Mean and sample standard deviation (0 for a single value) with the
/// symmetric 95% interval and empirical percentiles. NaNs are skipped.
StatSummary summarize_values(const std::vector<double>& values);
CircularSummary summarize_angles(const std::vector<double>& angles);

/// Throws DomainError when no trial succeeded.
McSummary summarize(const std::vector<TrialResult>& trials);
/// As above, also recording the reference Ritz values.
McSummary summarize(const MonteCarloRun& run);

}  // namespace gpkmd

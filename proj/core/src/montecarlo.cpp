#include "gpkmd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpkmd/error.hpp"
#include "gpkmd/random.hpp"
#include "gpkmd/swingsim.hpp"
#include "parallel.hpp"

namespace gpkmd {
namespace {

constexpr double kZ95 = 1.96;

double percentile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

TrackedMode track(const KoopmanDecomposition& dec, std::complex<double> reference, double radius,
                  Eigen::Index reference_task) {
  TrackedMode out;
  Eigen::Index best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    const double d = std::abs(dec.ritz_values(j) - reference);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  if (best < 0 || best_dist > radius) return out;

  out.matched = true;
  out.ritz_value = dec.ritz_values(best);
  out.growth_rate = std::abs(out.ritz_value);
  out.period = mode_period(out.ritz_value, dec.sample_period)
                   .value_or(std::numeric_limits<double>::quiet_NaN());
  out.amplitudes = dec.ritz_vectors.col(best).cwiseAbs();
  try {
    out.phases = mode_shape(dec, best, reference_task).phases;
  } catch (const ReferenceDegenerateError&) {
    out.phases = Eigen::VectorXd::Constant(dec.tasks(), std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace

HyperChoice choose_hyperparameters(const TrainingSet& ts, const HyperSettings& settings,
                                   unsigned workers) {
  if (settings.fixed) return {*settings.fixed, std::nullopt};
  const auto sel = loocv_select(ts, settings.grid.candidates(), settings.objective, workers);
  return {{sel.kernel, sel.noise_variance}, sel.score};
}

PipelineResult run_pipeline(const SnapshotSequence& seq, int embedding_order,
                            const HyperSettings& settings, unsigned workers) {
  const auto ts = build_training_set(seq, embedding_order);
  PipelineResult out;
  out.hyper = choose_hyperparameters(ts, settings, workers);
  const auto tasks = TaskCovariance::from_output_scales(ts.output_scales(),
                                                        out.hyper.candidate.noise_variance);
  const auto model = fit(ts, out.hyper.candidate.kernel, tasks);
  out.decomposition = decompose(model);
  return out;
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

MonteCarloRun run_trials(const SnapshotSequence& clean, const MonteCarloOptions& options) {
  if (options.n_trials < 1) throw DomainError("need at least one trial");
  if (!(options.noise_sigma >= 0.0)) throw DomainError("noise sigma must be non-negative");
  if (options.track_modes < 1) throw DomainError("need at least one tracked mode");

  MonteCarloRun run;
  run.tasks = clean.tasks();
  run.sample_period = clean.sample_period();
  run.reference_task = options.reference_task.value_or(clean.tasks() - 1);
  if (run.reference_task < 0 || run.reference_task >= clean.tasks()) {
    throw DomainError("reference task out of range");
  }

  const auto first_noisy = add_noise(clean, options.noise_sigma, trial_seed(options.base_seed, 0));
  run.hyper = choose_hyperparameters(
      build_training_set(options.noise_sigma > 0.0 ? first_noisy : clean, options.embedding_order),
      options.hyper, options.workers);

  HyperSettings frozen;
  frozen.fixed = run.hyper.candidate;
  const auto reference = run_pipeline(clean, options.embedding_order, frozen);
  const auto table = mode_table(reference.decomposition, run.reference_task);
  const auto tracked = std::min<std::size_t>(table.size(), static_cast<std::size_t>(options.track_modes));
  for (std::size_t r = 0; r < tracked; ++r) {
    run.reference.push_back({table[r].ritz_value, table[r].norm, table[r].growth_rate, table[r].period});
  }

  run.trials.resize(static_cast<std::size_t>(options.n_trials));
  // Trials are parallel across workers, so each LOO search stays single-threaded.
  detail::parallel_for(run.trials.size(), options.workers, [&](std::size_t t) {
    TrialResult& result = run.trials[t];
    result.trial = static_cast<int>(t);
    result.seed = trial_seed(options.base_seed, result.trial);
    try {
      const auto noisy = t == 0 ? first_noisy : add_noise(clean, options.noise_sigma, result.seed);
      HyperSettings settings = frozen;
      if (options.reselect_per_trial) settings = options.hyper;
      const auto pipeline = run_pipeline(noisy, options.embedding_order, settings, 1);
      const auto& dec = pipeline.decomposition;
      result.hyper = pipeline.hyper.candidate;
      result.residual_rms = std::sqrt(dec.residuals.squaredNorm() / static_cast<double>(dec.residuals.size()));
      result.vandermonde_residual = vandermonde_residual(dec);
      for (const auto& ref : run.reference) {
        result.modes.push_back(track(dec, ref.ritz_value, options.match_radius, run.reference_task));
      }
      result.ok = true;
    } catch (const Error& e) {
      result.ok = false;
      result.failure = e.what();
      result.modes.assign(run.reference.size(), TrackedMode{});
    }
  });

  const bool any_ok = std::any_of(run.trials.begin(), run.trials.end(),
                                  [](const TrialResult& r) { return r.ok; });
  if (!any_ok) {
    throw Error("all " + std::to_string(options.n_trials) +
                " Monte-Carlo trials failed; first failure: " + run.trials.front().failure);
  }
  return run;
}

StatSummary summarize_values(const std::vector<double>& values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  StatSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  s.lower = s.mean - kZ95 * s.stddev;
  s.upper = s.mean + kZ95 * s.stddev;
  std::sort(v.begin(), v.end());
  s.p025 = percentile(v, 0.025);
  s.p975 = percentile(v, 0.975);
  s.max = v.back();
  return s;
}

CircularSummary summarize_angles(const std::vector<double>& angles) {
  CircularSummary c;
  double sum_sin = 0.0;
  double sum_cos = 0.0;
  for (double a : angles) {
    if (std::isnan(a)) continue;
    sum_sin += std::sin(a);
    sum_cos += std::cos(a);
    ++c.count;
  }
  if (c.count == 0) return c;
  const double n = static_cast<double>(c.count);
  c.mean_direction = std::atan2(sum_sin / n, sum_cos / n);
  if (c.mean_direction <= -std::numbers::pi) c.mean_direction = std::numbers::pi;
  c.resultant_length = std::min(1.0, std::hypot(sum_sin / n, sum_cos / n));
  c.circular_stddev = c.resultant_length > 0.0 ? std::sqrt(-2.0 * std::log(c.resultant_length))
                                               : std::numeric_limits<double>::infinity();
  c.lower = c.mean_direction - kZ95 * c.circular_stddev;
  c.upper = c.mean_direction + kZ95 * c.circular_stddev;
  return c;
}

McSummary summarize(const std::vector<TrialResult>& trials) {
  McSummary out;
  out.trial_count = trials.size();
  std::size_t mode_count = 0;
  for (const auto& t : trials) {
    if (!t.ok) {
      ++out.failure_count;
    } else {
      mode_count = std::max(mode_count, t.modes.size());
    }
  }
  if (out.failure_count == out.trial_count) {
    throw DomainError("no successful trials to summarize");
  }

  for (std::size_t m = 0; m < mode_count; ++m) {
    ModeSummary ms;
    std::vector<double> growth, period;
    std::vector<std::vector<double>> amps, phases;
    for (const auto& t : trials) {
      if (!t.ok || m >= t.modes.size() || !t.modes[m].matched) continue;
      const auto& mode = t.modes[m];
      ++ms.matched;
      growth.push_back(mode.growth_rate);
      period.push_back(mode.period);
      if (amps.empty()) {
        amps.resize(static_cast<std::size_t>(mode.amplitudes.size()));
        phases.resize(static_cast<std::size_t>(mode.phases.size()));
      }
      for (Eigen::Index i = 0; i < mode.amplitudes.size(); ++i) amps[i].push_back(mode.amplitudes(i));
      for (Eigen::Index i = 0; i < mode.phases.size(); ++i) phases[i].push_back(mode.phases(i));
    }
    ms.growth_rate = summarize_values(growth);
    ms.period = summarize_values(period);
    double max_amp = 0.0;
    for (const auto& a : amps) {
      ms.amplitudes.push_back(summarize_values(a));
      if (ms.amplitudes.back().count) max_amp = std::max(max_amp, ms.amplitudes.back().mean);
    }
    for (const auto& p : phases) ms.phases.push_back(summarize_angles(p));
    for (const auto& a : ms.amplitudes) {
      ms.phase_unreliable.push_back(!(a.count > 0 && a.mean >= 0.05 * max_amp));
    }
    out.modes.push_back(std::move(ms));
  }
  return out;
}

McSummary summarize(const MonteCarloRun& run) {
  auto out = summarize(run.trials);
  for (std::size_t m = 0; m < out.modes.size() && m < run.reference.size(); ++m) {
    out.modes[m].reference_value = run.reference[m].ritz_value;
  }
  return out;
}

}  // namespace gpkmd

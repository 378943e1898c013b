#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "gpkmd/csv.hpp"
#include "gpkmd/error.hpp"
#include "gpkmd/report.hpp"
#include "gpkmd/swingsim.hpp"

namespace gpkmd::cli {
namespace {

namespace fs = std::filesystem;

void prepare_out(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec || !fs::is_directory(cfg.out)) {
    throw ConfigError("cannot create output directory " + cfg.out.string() +
                      (ec ? ": " + ec.message() : std::string{}));
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  f.close();
  if (!f) throw ConfigError("cannot write " + path.string());
}

template <class Writer>
void write_with(const fs::path& path, Writer&& writer) {
  std::ostringstream s;
  writer(s);
  write_file(path, s.str());
}

void echo_config(const PipelineConfig& cfg) {
  write_file(cfg.out / "effective_config.json", to_json(cfg).dump(2) + "\n");
}

struct Simulated {
  GridModel grid;
  Trajectory trajectory;
};

Simulated simulate_from(const PipelineConfig& cfg) {
  if (!cfg.grid) throw ConfigError("no grid file given (set \"grid\" or --grid)");
  auto grid = load_grid(*cfg.grid);
  const auto eq = find_equilibrium(grid);
  const auto init = cfg.disturbance
                        ? disturbed_init(grid, eq, cfg.disturbance->generator, cfg.disturbance->delta,
                                         cfg.disturbance->omega)
                        : eq;
  auto traj = simulate(grid, init, cfg.window_s, cfg.sample_period());
  return {std::move(grid), std::move(traj)};
}

SnapshotSequence read_series(const fs::path& path, double sample_period) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read series file " + path.string());
  return load_timeseries(in, sample_period);
}

/// Measured series are used as given; simulated ones get cfg.noise_sigma.
SnapshotSequence input_series(const PipelineConfig& cfg, bool with_noise) {
  if (cfg.series) return read_series(*cfg.series, cfg.sample_period());
  auto clean = observe(simulate_from(cfg).trajectory);
  if (with_noise && cfg.noise_sigma > 0.0) return add_noise(clean, cfg.noise_sigma, cfg.seed);
  return clean;
}

Eigen::Index reference_index(const PipelineConfig& cfg, const SnapshotSequence& seq) {
  if (!cfg.reference_task) return seq.tasks() - 1;
  const auto& labels = seq.labels();
  const auto it = std::find(labels.begin(), labels.end(), *cfg.reference_task);
  if (it == labels.end()) throw ConfigError("reference task '" + *cfg.reference_task + "' is not a series column");
  return it - labels.begin();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::string describe(const HyperCandidate& c) {
  return "sigma_f^2=" + fmt(c.kernel.signal_variance) + " ell=" + fmt(c.kernel.length_scale) +
         " noise=" + fmt(c.noise_variance);
}

std::string describe(std::complex<double> z) {
  return fmt(z.real()) + (z.imag() < 0 ? "-" : "+") + fmt(std::abs(z.imag())) + "i";
}

}  // namespace

void cmd_simulate(const PipelineConfig& cfg, std::ostream& out) {
  validate(cfg);
  prepare_out(cfg);
  const auto sim = simulate_from(cfg);
  const auto series = observe(sim.trajectory);
  write_with(cfg.out / "trajectory.csv",
             [&](std::ostream& s) { report::write_trajectory_csv(s, sim.trajectory, sim.grid); });
  write_with(cfg.out / "series.csv", [&](std::ostream& s) { report::write_series_csv(s, series); });
  if (cfg.noise_sigma > 0.0) {
    const auto noisy = add_noise(series, cfg.noise_sigma, cfg.seed);
    write_with(cfg.out / "series_noisy.csv", [&](std::ostream& s) { report::write_series_csv(s, noisy); });
  }
  echo_config(cfg);

  out << "simulated " << sim.grid.name() << ": " << series.snapshot_count() << " samples of "
      << series.tasks() << " generators\npeak |domega| [rad/s]:";
  for (Eigen::Index i = 0; i < series.tasks(); ++i) {
    out << ' ' << series.labels()[i] << '=' << fmt(series.values().row(i).cwiseAbs().maxCoeff(), 4);
  }
  out << '\n';
}

void cmd_decompose(const PipelineConfig& cfg, std::ostream& out) {
  validate(cfg);
  prepare_out(cfg);
  const auto seq = input_series(cfg, true);
  const auto ref = reference_index(cfg, seq);
  const auto result = run_pipeline(seq, cfg.embedding_order, cfg.hyper, cfg.workers);
  const auto& dec = result.decomposition;
  const auto table = mode_table(dec, ref);

  write_with(cfg.out / "series.csv", [&](std::ostream& s) { report::write_series_csv(s, seq); });
  write_with(cfg.out / "modes.csv",
             [&](std::ostream& s) { report::write_mode_table_csv(s, table, seq.labels()); });
  write_file(cfg.out / "spectrum.json", report::spectrum_json(dec, table, seq.labels(), result.hyper, ref));
  write_with(cfg.out / "residuals.csv", [&](std::ostream& s) { report::write_residuals_csv(s, dec); });
  echo_config(cfg);

  out << "hyperparameters: " << describe(result.hyper.candidate);
  if (result.hyper.loo_score) out << " (LOO " << fmt(*result.hyper.loo_score) << ")";
  out << "\nmodes (by norm):\n";
  for (std::size_t r = 0; r < std::min<std::size_t>(table.size(), 5); ++r) {
    const auto& m = table[r];
    out << "  j=" << r + 1 << " lambda=" << describe(m.ritz_value) << " |lambda|=" << fmt(m.growth_rate)
        << " period=" << (m.period ? fmt(*m.period) + " s" : std::string("-")) << " norm=" << fmt(m.norm)
        << '\n';
  }
  out << "vandermonde residual: " << fmt(vandermonde_residual(dec), 3) << '\n';
}

void cmd_select_hyper(const PipelineConfig& cfg, std::ostream& out) {
  validate(cfg);
  prepare_out(cfg);
  const auto seq = input_series(cfg, true);
  const auto ts = build_training_set(seq, cfg.embedding_order);
  const auto grid = cfg.hyper.grid.candidates();
  const auto sel = loocv_select(ts, grid, cfg.hyper.objective, cfg.workers);

  write_with(cfg.out / "loo_scores.csv", [&](std::ostream& s) {
    csv::write_row(s, std::vector<std::string>{"signal_variance", "length_scale", "noise_variance", "score"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      csv::write_row(s, std::vector<double>{grid[i].kernel.signal_variance, grid[i].kernel.length_scale,
                                            grid[i].noise_variance, sel.scores[i]});
    }
  });
  nlohmann::json j = {{"objective", std::string(to_string(sel.objective))},
                      {"score", sel.score},
                      {"signal_variance", sel.kernel.signal_variance},
                      {"length_scale", sel.kernel.length_scale},
                      {"noise_variance", sel.noise_variance}};
  write_file(cfg.out / "hyperparameters.json", j.dump(2) + "\n");
  echo_config(cfg);

  out << "selected " << describe(HyperCandidate{sel.kernel, sel.noise_variance}) << " (" << to_string(sel.objective)
      << " " << fmt(sel.score) << ") from " << grid.size() << " candidates\n";
}

void cmd_assess(const PipelineConfig& cfg, std::ostream& out) {
  validate(cfg);
  prepare_out(cfg);
  const auto clean = input_series(cfg, false);

  MonteCarloOptions opt;
  opt.n_trials = cfg.trials;
  opt.noise_sigma = cfg.noise_sigma;
  opt.base_seed = cfg.seed;
  opt.embedding_order = cfg.embedding_order;
  opt.hyper = cfg.hyper;
  opt.track_modes = cfg.track_modes;
  opt.reselect_per_trial = cfg.reselect_per_trial;
  opt.reference_task = reference_index(cfg, clean);
  opt.workers = cfg.workers;

  const auto run = run_trials(clean, opt);
  const auto summary = summarize(run);

  write_with(cfg.out / "trials.csv", [&](std::ostream& s) { report::write_trials_csv(s, run, clean.labels()); });
  write_file(cfg.out / "summary.json", report::summary_json(summary, run, clean.labels(), cfg.noise_sigma));
  if (cfg.plots) {
    std::vector<report::PlotSeries> growth, period;
    for (std::size_t m = 0; m < run.reference.size(); ++m) {
      report::PlotSeries g{"mode " + std::to_string(m + 1), {}};
      report::PlotSeries p{"mode " + std::to_string(m + 1), {}};
      for (const auto& t : run.trials) {
        if (!t.ok || !t.modes[m].matched) continue;
        g.points.emplace_back(t.trial, t.modes[m].growth_rate);
        p.points.emplace_back(t.trial, t.modes[m].period);
      }
      growth.push_back(std::move(g));
      period.push_back(std::move(p));
    }
    write_file(cfg.out / "growth_rate.svg", report::svg_scatter("Growth rate per trial", "trial", "|lambda|", growth));
    write_file(cfg.out / "period.svg", report::svg_scatter("Period per trial", "trial", "period [s]", period));
  }
  echo_config(cfg);

  out << "hyperparameters: " << describe(run.hyper.candidate) << '\n';
  out << "trials: " << summary.trial_count << " (" << summary.failure_count << " failed), sigma="
      << fmt(cfg.noise_sigma) << '\n';
  for (std::size_t m = 0; m < summary.modes.size(); ++m) {
    const auto& ms = summary.modes[m];
    out << "  mode " << m + 1 << " ref " << describe(ms.reference_value) << ": matched " << ms.matched
        << ", |lambda| " << fmt(ms.growth_rate.mean) << " +/- " << fmt(ms.growth_rate.half_width(), 3)
        << ", period " << fmt(ms.period.mean) << " +/- " << fmt(ms.period.half_width(), 3) << " s\n";
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Koopman mode decomposition of power-system swings via multi-task GP regression", "gpkmd"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::optional<std::string> grid, series, out, objective, reference_task;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_sigma, t_end, sample_hz;
    std::optional<int> p, trials, track_modes;
    std::optional<unsigned> workers;
    std::optional<bool> plots;
  } flags;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON pipeline config");
    sub->add_option("--grid", flags.grid, "grid JSON file");
    sub->add_option("--series", flags.series, "observed series CSV (skips simulation)");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "base random seed");
    sub->add_option("--noise-sigma", flags.noise_sigma, "observation noise standard deviation");
    sub->add_option("--t-end", flags.t_end, "analysis window [s]");
    sub->add_option("--sample-hz", flags.sample_hz, "sampling rate [Hz]");
    sub->add_option("--p", flags.p, "embedding order");
    sub->add_option("--objective", flags.objective, "LOO objective: squared_error or nlpd");
    sub->add_option("--reference-task", flags.reference_task, "phase reference column label");
    sub->add_option("--workers", flags.workers, "worker threads (0 = hardware concurrency)");
  };
  auto* sim = app.add_subcommand("simulate", "integrate the swing model and write trajectory/series CSV");
  auto* dec = app.add_subcommand("decompose", "fit the GP and write the mode table and spectrum");
  auto* sel = app.add_subcommand("select-hyper", "LOO-CV hyperparameter search");
  auto* ass = app.add_subcommand("assess", "Monte-Carlo noise assessment");
  for (auto* sub : {sim, dec, sel, ass}) add_common(sub);
  ass->add_option("--trials", flags.trials, "number of Monte-Carlo trials");
  ass->add_option("--track-modes", flags.track_modes, "number of dominant modes to follow");
  ass->add_option("--plots", flags.plots, "write SVG plots (true/false)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    PipelineConfig cfg = flags.config.empty() ? parse_config(nlohmann::json::object(), fs::current_path())
                                              : load_config(flags.config);
    const auto abs = [](const std::string& s) { return fs::absolute(s).lexically_normal(); };
    if (flags.grid) cfg.grid = abs(*flags.grid);
    if (flags.series) cfg.series = abs(*flags.series);
    if (flags.out) cfg.out = abs(*flags.out);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.noise_sigma) cfg.noise_sigma = *flags.noise_sigma;
    if (flags.t_end) cfg.window_s = *flags.t_end;
    if (flags.sample_hz) cfg.rate_hz = *flags.sample_hz;
    if (flags.p) cfg.embedding_order = *flags.p;
    if (flags.objective) cfg.hyper.objective = parse_loo_objective(*flags.objective);
    if (flags.reference_task) cfg.reference_task = *flags.reference_task;
    if (flags.workers) cfg.workers = *flags.workers;
    if (flags.trials) cfg.trials = *flags.trials;
    if (flags.track_modes) cfg.track_modes = *flags.track_modes;
    if (flags.plots) cfg.plots = *flags.plots;

    if (sim->parsed()) cmd_simulate(cfg, out);
    else if (dec->parsed()) cmd_decompose(cfg, out);
    else if (sel->parsed()) cmd_select_hyper(cfg, out);
    else cmd_assess(cfg, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InsufficientDataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace gpkmd::cli

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gpkmd/embedding.hpp"
#include "gpkmd/koopman.hpp"
#include "gpkmd/montecarlo.hpp"
#include "gpkmd/swingsim.hpp"

/// Writers for the CSV, JSON and SVG artifacts described in docs/formats.md.
namespace gpkmd::report {

/// One column per task, one row per snapshot; the time axis is implied
/// by the sample period.
void write_series_csv(std::ostream& out, const SnapshotSequence& seq);

/// time_s, delta_<label>..., domega_<label>... for every machine.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const GridModel& grid);

/// j, norm, growth_rate, period_s, amp_<task>..., phase_<task>...
void write_mode_table_csv(std::ostream& out, const std::vector<ModeStats>& table,
                          const std::vector<std::string>& labels);

/// k, residual_norm, relative_residual, expansion_error
void write_residuals_csv(std::ostream& out, const KoopmanDecomposition& dec);

/// Full spectrum, mode table and hyperparameters as pretty-printed JSON.
std::string spectrum_json(const KoopmanDecomposition& dec, const std::vector<ModeStats>& table,
                          const std::vector<std::string>& labels, const HyperChoice& hyper,
                          Eigen::Index reference_task);

/// One row per trial.
void write_trials_csv(std::ostream& out, const MonteCarloRun& run,
                      const std::vector<std::string>& labels);

std::string summary_json(const McSummary& summary, const MonteCarloRun& run,
                         const std::vector<std::string>& labels, double noise_sigma);

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // NaN points are skipped
};

/// Static scatter plot with linear axes.
std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace gpkmd::report

#include "gpkmd/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpkmd/csv.hpp"

namespace gpkmd::report {
namespace {

using nlohmann::json;

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

json complex_json(std::complex<double> z) { return json::array({number(z.real()), number(z.imag())}); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

std::string kind_name(ModeKind k) {
  switch (k) {
    case ModeKind::kOscillatory: return "oscillatory";
    case ModeKind::kNonOscillatory: return "non_oscillatory";
    case ModeKind::kDecayed: return "decayed";
  }
  return "unknown";
}

json hyper_json(const HyperCandidate& c) {
  return {{"signal_variance", c.kernel.signal_variance},
          {"length_scale", c.kernel.length_scale},
          {"noise_variance", c.noise_variance}};
}

json stat_json(const StatSummary& s) {
  return {{"count", s.count},       {"mean", number(s.mean)}, {"stddev", number(s.stddev)},
          {"lower", number(s.lower)}, {"upper", number(s.upper)}, {"p025", number(s.p025)},
          {"p975", number(s.p975)},  {"max", number(s.max)}};
}

json circ_json(const CircularSummary& c) {
  return {{"count", c.count},
          {"mean_direction", number(c.mean_direction)},
          {"resultant_length", number(c.resultant_length)},
          {"circular_stddev", number(c.circular_stddev)},
          {"lower", number(c.lower)},
          {"upper", number(c.upper)}};
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_series_csv(std::ostream& out, const SnapshotSequence& seq) {
  csv::write_row(out, seq.labels());
  std::vector<double> row(static_cast<std::size_t>(seq.tasks()));
  for (Eigen::Index k = 0; k < seq.snapshot_count(); ++k) {
    for (Eigen::Index i = 0; i < seq.tasks(); ++i) row[i] = seq.values()(i, k);
    csv::write_row(out, row);
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const GridModel& grid) {
  const Eigen::Index m = traj.angles.rows();
  std::vector<std::string> header{"time_s"};
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("delta_" + std::to_string(grid.label(i)));
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("domega_" + std::to_string(grid.label(i)));
  csv::write_row(out, header);
  std::vector<double> row(static_cast<std::size_t>(2 * m + 1));
  for (Eigen::Index k = 0; k < traj.samples(); ++k) {
    row[0] = traj.times[k];
    for (Eigen::Index i = 0; i < m; ++i) {
      row[1 + i] = traj.angles(i, k);
      row[1 + m + i] = traj.speed_deviations(i, k);
    }
    csv::write_row(out, row);
  }
}

void write_mode_table_csv(std::ostream& out, const std::vector<ModeStats>& table,
                          const std::vector<std::string>& labels) {
  std::vector<std::string> header{"j", "norm", "growth_rate", "period_s"};
  for (const auto& l : labels) header.push_back("amp_" + l);
  for (const auto& l : labels) header.push_back("phase_" + l);
  csv::write_row(out, header);
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table[r];
    std::vector<std::string> cells{std::to_string(r + 1), csv::format(row.norm),
                                   csv::format(row.growth_rate),
                                   row.period ? csv::format(*row.period) : std::string{}};
    for (Eigen::Index i = 0; i < row.amplitudes.size(); ++i) cells.push_back(csv::format(row.amplitudes(i)));
    for (Eigen::Index i = 0; i < row.phases.size(); ++i) cells.push_back(csv::format(row.phases(i)));
    csv::write_row(out, cells);
  }
}

void write_residuals_csv(std::ostream& out, const KoopmanDecomposition& dec) {
  csv::write_row(out, std::vector<std::string>{"k", "residual_norm", "relative_residual", "expansion_error"});
  for (Eigen::Index k = 0; k < dec.size(); ++k) {
    const double r = dec.residuals.col(k).norm();
    const double y = dec.outputs.col(k).norm();
    const auto rec = reconstruct(dec, k);
    const double e = (rec.value - dec.latent_means.col(k)).norm();
    csv::write_row(out, std::vector<std::string>{std::to_string(k), csv::format(r),
                                                 csv::format(y > 0.0 ? r / y : r), csv::format(e)});
  }
}

std::string spectrum_json(const KoopmanDecomposition& dec, const std::vector<ModeStats>& table,
                          const std::vector<std::string>& labels, const HyperChoice& hyper,
                          Eigen::Index reference_task) {
  json doc;
  doc["sample_period"] = dec.sample_period;
  doc["embedding_order"] = dec.embedding_order;
  doc["tasks"] = labels;
  doc["reference_task"] = labels.at(static_cast<std::size_t>(reference_task));
  doc["hyperparameters"] = hyper_json(hyper.candidate);
  doc["loo_score"] = hyper.loo_score ? number(*hyper.loo_score) : json(nullptr);
  doc["used_pseudo_inverse"] = dec.used_pseudo_inverse;
  doc["vandermonde_residual"] = number(vandermonde_residual(dec));

  json spectrum = json::array();
  for (Eigen::Index j = 0; j < dec.size(); ++j) {
    json vec = json::array();
    for (Eigen::Index i = 0; i < dec.tasks(); ++i) vec.push_back(complex_json(dec.ritz_vectors(i, j)));
    spectrum.push_back({{"ritz_value", complex_json(dec.ritz_values(j))}, {"ritz_vector", vec}});
  }
  doc["spectrum"] = spectrum;
  doc["companion_coefficients"] = vector_json(dec.companion_coeffs);

  json modes = json::array();
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& m = table[r];
    modes.push_back({{"j", r + 1},
                     {"index", m.index},
                     {"ritz_value", complex_json(m.ritz_value)},
                     {"norm", number(m.norm)},
                     {"growth_rate", number(m.growth_rate)},
                     {"period_s", m.period ? number(*m.period) : json(nullptr)},
                     {"kind", kind_name(m.kind)},
                     {"amplitudes", vector_json(m.amplitudes)},
                     {"phases", vector_json(m.phases)}});
  }
  doc["modes"] = modes;
  return doc.dump(2) + "\n";
}

void write_trials_csv(std::ostream& out, const MonteCarloRun& run,
                      const std::vector<std::string>& labels) {
  std::vector<std::string> header{"trial", "seed", "ok", "signal_variance", "length_scale",
                                  "noise_variance", "residual_rms", "vandermonde_residual"};
  for (std::size_t m = 0; m < run.reference.size(); ++m) {
    const std::string p = "mode" + std::to_string(m + 1) + "_";
    for (const char* f : {"matched", "lambda_re", "lambda_im", "growth_rate", "period_s"}) header.push_back(p + f);
    for (const auto& l : labels) header.push_back(p + "amp_" + l);
    for (const auto& l : labels) header.push_back(p + "phase_" + l);
  }
  header.push_back("failure");
  csv::write_row(out, header);

  const auto fmt = [](double v) { return std::isnan(v) ? std::string{} : csv::format(v); };
  for (const auto& t : run.trials) {
    std::vector<std::string> cells{std::to_string(t.trial), std::to_string(t.seed), t.ok ? "1" : "0"};
    if (t.ok) {
      for (double v : {t.hyper.kernel.signal_variance, t.hyper.kernel.length_scale, t.hyper.noise_variance,
                       t.residual_rms, t.vandermonde_residual}) {
        cells.push_back(fmt(v));
      }
    } else {
      cells.insert(cells.end(), 5, std::string{});
    }
    for (std::size_t m = 0; m < run.reference.size(); ++m) {
      const bool have = t.ok && m < t.modes.size() && t.modes[m].matched;
      cells.push_back(have ? "1" : "0");
      if (!have) {
        cells.insert(cells.end(), 4 + 2 * labels.size(), std::string{});
        continue;
      }
      const auto& mode = t.modes[m];
      for (double v : {mode.ritz_value.real(), mode.ritz_value.imag(), mode.growth_rate, mode.period}) {
        cells.push_back(fmt(v));
      }
      for (Eigen::Index i = 0; i < mode.amplitudes.size(); ++i) cells.push_back(fmt(mode.amplitudes(i)));
      for (Eigen::Index i = 0; i < mode.phases.size(); ++i) cells.push_back(fmt(mode.phases(i)));
    }
    std::string failure = t.failure;
    std::replace(failure.begin(), failure.end(), ',', ';');
    std::replace(failure.begin(), failure.end(), '\n', ' ');
    cells.push_back(failure);
    csv::write_row(out, cells);
  }
}

std::string summary_json(const McSummary& summary, const MonteCarloRun& run,
                         const std::vector<std::string>& labels, double noise_sigma) {
  json doc;
  doc["noise_sigma"] = noise_sigma;
  doc["trial_count"] = summary.trial_count;
  doc["failure_count"] = summary.failure_count;
  doc["sample_period"] = run.sample_period;
  doc["tasks"] = labels;
  doc["reference_task"] = labels.at(static_cast<std::size_t>(run.reference_task));
  doc["hyperparameters"] = hyper_json(run.hyper.candidate);
  doc["loo_score"] = run.hyper.loo_score ? number(*run.hyper.loo_score) : json(nullptr);

  json modes = json::array();
  for (std::size_t m = 0; m < summary.modes.size(); ++m) {
    const auto& ms = summary.modes[m];
    json entry;
    entry["mode"] = m + 1;
    entry["reference_value"] = complex_json(ms.reference_value);
    if (m < run.reference.size()) {
      entry["reference_growth_rate"] = number(run.reference[m].growth_rate);
      entry["reference_period_s"] = run.reference[m].period ? number(*run.reference[m].period) : json(nullptr);
    }
    entry["matched"] = ms.matched;
    entry["growth_rate"] = stat_json(ms.growth_rate);
    entry["period_s"] = stat_json(ms.period);
    json amps = json::array();
    json phases = json::array();
    for (std::size_t i = 0; i < ms.amplitudes.size(); ++i) {
      amps.push_back(stat_json(ms.amplitudes[i]));
      json p = circ_json(ms.phases.at(i));
      p["unreliable"] = static_cast<bool>(ms.phase_unreliable.at(i));
      phases.push_back(p);
    }
    entry["amplitudes"] = amps;
    entry["phases"] = phases;
    modes.push_back(entry);
  }
  doc["modes"] = modes;
  return doc.dump(2) + "\n";
}

std::string svg_scatter(const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::vector<PlotSeries>& series) {
  constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x); x1 = std::max(x1, x);
      y0 = std::min(y0, y); y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
  if (x1 - x0 == 0.0) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 == 0.0) {
    const double pad = std::max(1e-9, std::abs(y0) * 1e-3);
    y0 -= pad; y1 += pad;
  }
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad; y1 += ypad;
  const auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  const auto py = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";
  svg << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\"" << kH - kT - kB
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
        << csv::format(std::round(xv * 1e4) / 1e4) << "</text>\n";
    svg << "<text x=\"" << kL - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << csv::format(std::round(yv * 1e4) / 1e4) << "</text>\n";
  }
  svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
      << "</text>\n";
  svg << "<text transform=\"translate(16," << kH / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    svg << "<g fill=\"" << color << "\">\n";
    for (const auto& [x, y] : series[s].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      svg << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2.5\"/>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << kW - kR - 4 << "\" y=\"" << kT + 16 * (s + 1) << "\" text-anchor=\"end\" fill=\""
        << color << "\">" << xml_escape(series[s].name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gpkmd::report

#include "gpkmd/swingsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "gpkmd/error.hpp"
#include "gpkmd/random.hpp"

namespace gpkmd {
namespace {

using nlohmann::json;

Eigen::VectorXd read_vector(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("grid config is missing '") + key + "'");
  const auto& arr = j.at(key);
  if (!arr.is_array()) throw ConfigError(std::string("grid field '") + key + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

Eigen::MatrixXd read_matrix(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("grid config is missing '") + key + "'");
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) {
    throw ConfigError(std::string("grid field '") + key + "' must be a non-empty array of rows");
  }
  const auto n = rows.size();
  const auto m = rows.front().size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != m) {
      throw ConfigError(std::string("grid field '") + key + "' is ragged at row " + std::to_string(r));
    }
    for (std::size_t c = 0; c < m; ++c) {
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  return a;
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Eigen::MatrixXd& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    Eigen::VectorXd row = a.row(r).transpose();
    rows.push_back(to_json(row));
  }
  return rows;
}

// dP_ei / d delta_j over all machines.
Eigen::MatrixXd power_jacobian(const Eigen::VectorXd& angles, const GridModel& grid) {
  const auto& p = grid.params();
  const auto n = grid.machines();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = angles(i) - angles(j);
      const double ee = p.internal_voltage(i) * p.internal_voltage(j);
      const double v = ee * (-p.conductance(i, j) * std::sin(d) + p.susceptance(i, j) * std::cos(d));
      jac(i, j) = -v;
      jac(i, i) += v;
    }
  }
  return jac;
}

}  // namespace

GridModel::GridModel(Params params) : p_(std::move(params)) {
  const auto n = p_.inertia.size();
  if (n < 2) throw DomainError("grid needs a reference machine and at least one generator");
  if (p_.damping.size() != n || p_.mech_power.size() != n || p_.internal_voltage.size() != n) {
    throw DomainError("per-machine arrays must all have " + std::to_string(n) + " entries");
  }
  if (p_.conductance.rows() != n || p_.conductance.cols() != n || p_.susceptance.rows() != n ||
      p_.susceptance.cols() != n) {
    throw DomainError("G and B must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (p_.reference < 0 || p_.reference >= n) throw DomainError("reference index out of range");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p_.inertia(i) > 0.0)) throw DomainError("inertia H_" + std::to_string(i + 1) + " must be positive");
    if (!(p_.damping(i) >= 0.0)) throw DomainError("damping D_" + std::to_string(i + 1) + " must be non-negative");
  }
  if (!(p_.base_frequency > 0.0)) throw DomainError("base frequency must be positive");
  if (!p_.inertia.allFinite() || !p_.damping.allFinite() || !p_.mech_power.allFinite() ||
      !p_.internal_voltage.allFinite() || !p_.conductance.allFinite() ||
      !p_.susceptance.allFinite() || !std::isfinite(p_.base_frequency) ||
      !std::isfinite(p_.reference_angle)) {
    throw DomainError("grid parameters must be finite");
  }
  const double tol = 1e-9 * std::max(1.0, std::max(p_.conductance.cwiseAbs().maxCoeff(), p_.susceptance.cwiseAbs().maxCoeff()));
  if ((p_.conductance - p_.conductance.transpose()).cwiseAbs().maxCoeff() > tol ||
      (p_.susceptance - p_.susceptance.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw DomainError("G and B must be symmetric");
  }
}

Eigen::Index GridModel::index_of(int label) const {
  const Eigen::Index idx = label - 1;
  if (idx < 0 || idx >= machines()) {
    throw DomainError("no machine with label " + std::to_string(label));
  }
  return idx;
}

std::vector<Eigen::Index> GridModel::dynamic_indices() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < machines(); ++i) {
    if (i != p_.reference) out.push_back(i);
  }
  return out;
}

GridModel parse_grid(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("grid config is not valid JSON: ") + e.what());
  }
  try {
    GridModel::Params p;
    p.name = j.value("name", std::string{});
    p.inertia = read_vector(j, "inertia");
    p.damping = read_vector(j, "damping");
    p.mech_power = read_vector(j, "mech_power");
    p.internal_voltage = read_vector(j, "internal_voltage");
    p.conductance = read_matrix(j, "conductance");
    p.susceptance = read_matrix(j, "susceptance");
    p.base_frequency = j.value("base_frequency", 60.0);
    p.reference = j.value("reference", 0);
    p.reference_angle = j.value("reference_angle", 0.0);
    if (j.contains("n_gen") && j.at("n_gen").get<Eigen::Index>() != p.inertia.size() - 1) {
      throw ConfigError("n_gen must equal the number of machines minus the reference");
    }
    return GridModel(std::move(p));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid config has a field of the wrong type: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

GridModel load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read grid file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_grid(buffer.str());
}

std::string grid_to_json(const GridModel& grid) {
  const auto& p = grid.params();
  json j;
  j["name"] = p.name;
  j["n_gen"] = grid.n_gen();
  j["reference"] = p.reference;
  j["reference_angle"] = p.reference_angle;
  j["base_frequency"] = p.base_frequency;
  j["inertia"] = to_json(p.inertia);
  j["damping"] = to_json(p.damping);
  j["mech_power"] = to_json(p.mech_power);
  j["internal_voltage"] = to_json(p.internal_voltage);
  j["conductance"] = to_json(p.conductance);
  j["susceptance"] = to_json(p.susceptance);
  return j.dump(2);
}

Eigen::VectorXd electrical_power(const Eigen::Ref<const Eigen::VectorXd>& angles, const GridModel& grid) {
  const auto n = grid.machines();
  if (angles.size() != n) {
    throw DomainError("angle vector has " + std::to_string(angles.size()) + " entries, grid has " +
                      std::to_string(n) + " machines");
  }
  const auto& p = grid.params();
  Eigen::VectorXd pe(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = angles(i) - angles(j);
      sum += p.internal_voltage(j) * (p.conductance(i, j) * std::cos(d) + p.susceptance(i, j) * std::sin(d));
    }
    pe(i) = p.internal_voltage(i) * sum;
  }
  return pe;
}

SwingState rhs(const SwingState& state, const GridModel& grid) {
  const auto n = grid.machines();
  if (state.angles.size() != n || state.speed_deviations.size() != n) {
    throw DomainError("state dimension does not match the grid");
  }
  if (!state.angles.allFinite() || !state.speed_deviations.allFinite()) {
    throw IntegrationError("non-finite swing state", std::numeric_limits<double>::quiet_NaN());
  }
  const auto& p = grid.params();
  const Eigen::VectorXd pe = electrical_power(state.angles, grid);
  SwingState d;
  d.angles = state.speed_deviations;
  d.speed_deviations = (std::numbers::pi * p.base_frequency) *
                       (p.mech_power - p.damping.cwiseProduct(state.speed_deviations) - pe)
                           .cwiseQuotient(p.inertia);
  d.angles(p.reference) = 0.0;
  d.speed_deviations(p.reference) = 0.0;
  return d;
}

Eigen::Index sample_count(double t_end, double output_period) {
  if (!(t_end > 0.0) || !(output_period > 0.0)) {
    throw DomainError("t_end and output_period must be positive");
  }
  return static_cast<Eigen::Index>(std::floor(t_end / output_period + 1e-9)) + 1;
}

Trajectory simulate(const GridModel& grid, const SwingState& init, double t_end,
                    double output_period, const SimulationOptions& options) {
  const auto n = grid.machines();
  if (init.angles.size() != n || init.speed_deviations.size() != n) {
    throw DomainError("initial state dimension does not match the grid");
  }
  const auto count = sample_count(t_end, output_period);

  Trajectory traj;
  traj.output_period = output_period;
  traj.reference = grid.reference();
  traj.times.resize(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    traj.times[static_cast<std::size_t>(k)] = static_cast<double>(k) * output_period;
  }

  Eigen::VectorXd y0(2 * n);
  y0 << init.angles, init.speed_deviations;
  y0(grid.reference() + n) = 0.0;

  const auto& p = grid.params();
  const double omega_b = std::numbers::pi * p.base_frequency;
  OdeRhs f = [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dydt) {
    const auto angles = y.head(n);
    const auto speeds = y.tail(n);
    const Eigen::VectorXd pe = electrical_power(angles, grid);
    dydt.head(n) = speeds;
    dydt.tail(n) = omega_b * (p.mech_power - p.damping.cwiseProduct(speeds) - pe).cwiseQuotient(p.inertia);
    dydt(grid.reference()) = 0.0;
    dydt(grid.reference() + n) = 0.0;
  };

  OdeOptions ode;
  ode.rtol = options.rtol;
  ode.atol = options.atol;
  const Eigen::MatrixXd samples = integrate_dense(f, 0.0, y0, traj.times, ode);
  if (!samples.allFinite()) {
    throw IntegrationError("trajectory became non-finite", traj.times.back());
  }
  traj.angles = samples.topRows(n);
  traj.speed_deviations = samples.bottomRows(n);
  return traj;
}

SwingState find_equilibrium(const GridModel& grid, const EquilibriumOptions& options) {
  const auto& p = grid.params();
  const auto dyn = grid.dynamic_indices();
  const auto m = static_cast<Eigen::Index>(dyn.size());

  Eigen::VectorXd angles = Eigen::VectorXd::Zero(grid.machines());
  angles(grid.reference()) = p.reference_angle;

  auto mismatch = [&](const Eigen::VectorXd& a) {
    const Eigen::VectorXd pe = electrical_power(a, grid);
    Eigen::VectorXd r(m);
    for (Eigen::Index k = 0; k < m; ++k) r(k) = p.mech_power(dyn[k]) - pe(dyn[k]);
    return r;
  };

  Eigen::VectorXd r = mismatch(angles);
  double norm = r.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < options.max_iterations && norm > options.tolerance; ++iter) {
    const Eigen::MatrixXd full = power_jacobian(angles, grid);
    Eigen::MatrixXd jac(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) jac(a, b) = full(dyn[a], dyn[b]);
    }
    // r = P_m - P_e, so the Newton step solves J step = r.
    const Eigen::VectorXd step = jac.fullPivLu().solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      Eigen::VectorXd trial = angles;
      for (Eigen::Index k = 0; k < m; ++k) trial(dyn[k]) += lambda * step(k);
      const Eigen::VectorXd r_trial = mismatch(trial);
      const double n_trial = r_trial.cwiseAbs().maxCoeff();
      if (std::isfinite(n_trial) && n_trial < norm) {
        angles = trial;
        r = r_trial;
        norm = n_trial;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(norm <= options.tolerance)) {
    throw EquilibriumError("equilibrium search did not converge (residual " + std::to_string(norm) + ")",
                           norm);
  }
  return {angles, Eigen::VectorXd::Zero(grid.machines())};
}

SwingState disturbed_init(const GridModel& grid, const SwingState& equilibrium, int label,
                          double d_delta, double d_omega) {
  const auto idx = grid.index_of(label);
  if (idx == grid.reference()) {
    throw DomainError("generator " + std::to_string(label) + " is the reference machine");
  }
  if (equilibrium.angles.size() != grid.machines() ||
      equilibrium.speed_deviations.size() != grid.machines()) {
    throw DomainError("equilibrium dimension does not match the grid");
  }
  SwingState init = equilibrium;
  init.angles(idx) += d_delta;
  init.speed_deviations(idx) += d_omega;
  return init;
}

SnapshotSequence observe(const Trajectory& traj) {
  const auto n = traj.speed_deviations.rows();
  Eigen::MatrixXd values(n - 1, traj.samples());
  std::vector<std::string> labels;
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == traj.reference) continue;
    values.row(row++) = traj.speed_deviations.row(i);
    labels.push_back("gen" + std::to_string(i + 1));
  }
  return SnapshotSequence(std::move(values), traj.output_period, std::move(labels));
}

SnapshotSequence add_noise(const SnapshotSequence& seq, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("noise standard deviation must be non-negative");
  Eigen::MatrixXd values = seq.values();
  if (sigma > 0.0) {
    const NormalStream stream(seed);
    const auto m = values.rows();
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      for (Eigen::Index i = 0; i < m; ++i) {
        values(i, k) += sigma * stream.draw(static_cast<std::uint64_t>(k * m + i));
      }
    }
  }
  return SnapshotSequence(std::move(values), seq.sample_period(), seq.labels());
}

}  // namespace gpkmd

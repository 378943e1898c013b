#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gpkmd/embedding.hpp"
#include "gpkmd/ode.hpp"

namespace gpkmd {

/// Classical-model parameters of a reduced multi-machine grid.
///
/// Arrays cover every machine including the infinite bus. Machine at array
/// index i carries label i+1, so with the reference at index 0 the dynamic
/// generators are labelled 2..n_gen+1.
class GridModel {
 public:
  struct Params {
    std::string name;
    Eigen::VectorXd inertia;           // H_i [s]
    Eigen::VectorXd damping;           // D_i [s]
    Eigen::VectorXd mech_power;        // P_mi [pu]
    Eigen::VectorXd internal_voltage;  // E_i [pu]
    Eigen::MatrixXd conductance;       // G_ij [pu]
    Eigen::MatrixXd susceptance;       // B_ij [pu]
    double base_frequency = 60.0;      // f_b [Hz]
    Eigen::Index reference = 0;        // array index of the infinite bus
    double reference_angle = 0.0;      // fixed delta of the infinite bus [rad]
  };

  /// Throws DomainError when an invariant fails.
  explicit GridModel(Params params);

  const Params& params() const noexcept { return p_; }
  const std::string& name() const noexcept { return p_.name; }
  Eigen::Index machines() const noexcept { return p_.inertia.size(); }
  /// Number of dynamic (non-reference) generators.
  Eigen::Index n_gen() const noexcept { return machines() - 1; }
  Eigen::Index reference() const noexcept { return p_.reference; }

  int label(Eigen::Index index) const noexcept { return static_cast<int>(index) + 1; }
  /// Array index of a label; throws DomainError if there is no such machine.
  Eigen::Index index_of(int label) const;
  /// Array indices of the dynamic generators in ascending order.
  std::vector<Eigen::Index> dynamic_indices() const;

 private:
  Params p_;
};

/// Parses the JSON grid description (see docs/formats.md).
GridModel parse_grid(std::string_view json_text);
/// Reads a grid file. Throws ConfigError if the file cannot be read.
GridModel load_grid(const std::filesystem::path& path);
std::string grid_to_json(const GridModel& grid);

/// Rotor angles and speed deviations of every machine.
struct SwingState {
  Eigen::VectorXd angles;            // delta_i [rad]
  Eigen::VectorXd speed_deviations;  // Delta omega_i [rad/s]
};

struct Trajectory {
  std::vector<double> times;          // [s], strictly increasing
  Eigen::MatrixXd angles;             // machines x samples
  Eigen::MatrixXd speed_deviations;   // machines x samples
  double output_period = 0.0;
  Eigen::Index reference = 0;

  Eigen::Index samples() const noexcept { return static_cast<Eigen::Index>(times.size()); }
};

/// P_ei = sum_j E_i E_j (G_ij cos(d_i - d_j) + B_ij sin(d_i - d_j)) for every machine.
Eigen::VectorXd electrical_power(const Eigen::Ref<const Eigen::VectorXd>& angles, const GridModel& grid);

/// Swing-equation derivative. The reference machine's derivatives are zero.
/// Throws IntegrationError on a non-finite state.
SwingState rhs(const SwingState& state, const GridModel& grid);

struct SimulationOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
};

/// Number of output samples on [0, t_end]: floor(t_end / output_period) + 1.
Eigen::Index sample_count(double t_end, double output_period);

/// Integrates the classical model with Dormand-Prince 4(5) and samples the
/// dense output at multiples of output_period. Throws IntegrationError on
/// divergence.
Trajectory simulate(const GridModel& grid, const SwingState& init, double t_end,
                    double output_period, const SimulationOptions& options = {});

struct EquilibriumOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

/// Damped Newton on P_m - P_e(delta) = 0 over the dynamic machines, starting
/// from delta = 0. Throws EquilibriumError with the final residual.
SwingState find_equilibrium(const GridModel& grid, const EquilibriumOptions& options = {});

/// Equilibrium with (d_delta, d_omega) added at generator `label` only.
SwingState disturbed_init(const GridModel& grid, const SwingState& equilibrium, int label,
                          double d_delta, double d_omega);

/// Speed deviations of the dynamic generators as a snapshot sequence,
/// labelled "gen<label>".
SnapshotSequence observe(const Trajectory& traj);

/// Adds i.i.d. N(0, sigma^2) to every entry. Entry (task i, snapshot k)
/// uses draw index k*M + i of the seeded stream, so equal seeds give
/// bit-identical output.
SnapshotSequence add_noise(const SnapshotSequence& seq, double sigma, std::uint64_t seed);

}  // namespace gpkmd

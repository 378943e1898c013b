#pragma once

// Shared scenario builders for the unit and acceptance tests.

#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <random>

#include <Eigen/Dense>

#include "gpkmd/embedding.hpp"
#include "gpkmd/koopman.hpp"
#include "gpkmd/swingsim.hpp"

#ifndef GPKMD_SOURCE_DIR
#error "GPKMD_SOURCE_DIR must point at the repository root"
#endif

namespace fixtures {

inline std::filesystem::path source_dir() { return GPKMD_SOURCE_DIR; }
inline std::filesystem::path config_path(const char* name) { return source_dir() / "configs" / name; }

/// Planted stable linear system: two complex pairs r_j exp(+-i theta_j).
struct Planted {
  std::array<std::complex<double>, 4> eigenvalues;
  gpkmd::SnapshotSequence series;
};

inline Planted planted(int tasks = 4, int samples = 60, unsigned seed = 0) {
  const double r[2] = {0.98, 0.95};
  const double th[2] = {0.4, 0.9};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd w(tasks, 2);
  for (int i = 0; i < tasks; ++i)
    for (int j = 0; j < 2; ++j) w(i, j) = {nd(rng), nd(rng)};
  const std::complex<double> l0 = std::polar(r[0], th[0]);
  const std::complex<double> l1 = std::polar(r[1], th[1]);
  Eigen::MatrixXd y(tasks, samples);
  std::complex<double> p0 = 1.0, p1 = 1.0;
  for (int k = 0; k < samples; ++k) {
    for (int i = 0; i < tasks; ++i) y(i, k) = 2.0 * (w(i, 0) * p0 + w(i, 1) * p1).real();
    p0 *= l0;
    p1 *= l1;
  }
  return {{l0, std::conj(l0), l1, std::conj(l1)}, gpkmd::SnapshotSequence(std::move(y), 1.0)};
}

inline gpkmd::GridModel ne_grid() { return gpkmd::load_grid(config_path("ne_like.json")); }

/// NE-like grid disturbed at generator 8 by (+1.5 rad, +3 rad/s).
inline gpkmd::Trajectory ne_trajectory(double t_end = 4.0, double period = 1.0 / 15.0) {
  const auto grid = ne_grid();
  const auto eq = gpkmd::find_equilibrium(grid);
  return gpkmd::simulate(grid, gpkmd::disturbed_init(grid, eq, 8, 1.5, 3.0), t_end, period);
}

inline gpkmd::SnapshotSequence ne_series() { return gpkmd::observe(ne_trajectory()); }

/// Single machine against an infinite bus: P_e = E1 E2 B sin(delta).
inline gpkmd::GridModel smib(double h = 5.0, double b = 1.0, double pm = 0.5, double damping = 0.0) {
  gpkmd::GridModel::Params p;
  p.name = "smib";
  p.inertia = Eigen::Vector2d(1e6, h);
  p.damping = Eigen::Vector2d(0.0, damping);
  p.mech_power = Eigen::Vector2d(-pm, pm);
  p.internal_voltage = Eigen::Vector2d(1.0, 1.0);
  p.conductance = Eigen::Matrix2d::Zero();
  p.susceptance = (Eigen::Matrix2d() << -b, b, b, -b).finished();
  p.base_frequency = 60.0;
  return gpkmd::GridModel(std::move(p));
}

/// max_k || sum_j lambda_j^k v_j - G_GP[:, k] || / ||G_GP|| computed by plain loops.
inline double expansion_error(const gpkmd::KoopmanDecomposition& dec) {
  const double g = dec.latent_means.norm();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < dec.size(); ++k) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dec.tasks());
    for (Eigen::Index j = 0; j < dec.size(); ++j) {
      std::complex<double> pw = 1.0;
      for (Eigen::Index q = 0; q < k; ++q) pw *= dec.ritz_values(j);
      acc += pw * dec.ritz_vectors.col(j);
    }
    worst = std::max(worst, (acc - dec.latent_means.col(k).cast<std::complex<double>>()).norm());
  }
  return g > 0.0 ? worst / g : worst;
}

}  // namespace fixtures

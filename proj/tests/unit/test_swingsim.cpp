#include <gtest/gtest.h>

#include <numbers>

#include "fixtures.hpp"
#include "gpkmd/error.hpp"
#include "gpkmd/random.hpp"
#include "gpkmd/swingsim.hpp"

using namespace gpkmd;

namespace {

const char* kTwoMachine = R"({
  "name": "two", "n_gen": 1, "reference": 0, "base_frequency": 50,
  "inertia": [100, 4], "damping": [0, 0.2], "mech_power": [-0.4, 0.4],
  "internal_voltage": [1, 1.1],
  "conductance": [[0.1, 0.0], [0.0, 0.1]],
  "susceptance": [[-2, 2], [2, -2]]
})";

}  // namespace

TEST(Grid, ParseAndLabels) {
  const auto g = parse_grid(kTwoMachine);
  EXPECT_EQ(g.name(), "two");
  EXPECT_EQ(g.machines(), 2);
  EXPECT_EQ(g.n_gen(), 1);
  EXPECT_EQ(g.label(1), 2);
  EXPECT_EQ(g.index_of(2), 1);
  EXPECT_THROW(g.index_of(3), DomainError);
  EXPECT_EQ(g.dynamic_indices(), std::vector<Eigen::Index>{1});
  EXPECT_EQ(g.params().base_frequency, 50.0);
}

TEST(Grid, JsonRoundTrip) {
  const auto g = fixtures::ne_grid();
  const auto again = parse_grid(grid_to_json(g));
  EXPECT_EQ(again.params().susceptance, g.params().susceptance);
  EXPECT_EQ(again.params().mech_power, g.params().mech_power);
  EXPECT_EQ(again.params().inertia, g.params().inertia);
  EXPECT_EQ(again.n_gen(), 9);
}

TEST(Grid, ConfigErrors) {
  EXPECT_THROW(parse_grid("{"), ConfigError);
  EXPECT_THROW(parse_grid(R"({"inertia": [1]})"), ConfigError);
  std::string bad = kTwoMachine;
  bad.replace(bad.find("\"n_gen\": 1"), 10, "\"n_gen\": 5");
  EXPECT_THROW(parse_grid(bad), ConfigError);
  std::string neg = kTwoMachine;
  neg.replace(neg.find("[100, 4]"), 8, "[100, -4]");
  EXPECT_THROW(parse_grid(neg), ConfigError);
  std::string asym = kTwoMachine;
  asym.replace(asym.find("[[-2, 2], [2, -2]]"), 18, "[[-2, 2], [1, -2]]");
  EXPECT_THROW(parse_grid(asym), ConfigError);
  EXPECT_THROW(load_grid("/nonexistent/grid.json"), ConfigError);
}

TEST(Swing, ElectricalPowerMatchesLoops) {
  const auto g = fixtures::ne_grid();
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(10, -0.3, 0.8);
  const auto pe = electrical_power(d, g);
  const auto& p = g.params();
  for (Eigen::Index i = 0; i < 10; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < 10; ++j) {
      const double x = d(i) - d(j);
      s += p.internal_voltage(i) * p.internal_voltage(j) *
           (p.conductance(i, j) * std::cos(x) + p.susceptance(i, j) * std::sin(x));
    }
    EXPECT_NEAR(pe(i), s, 1e-12);
  }
}

TEST(Swing, RhsReferenceIsFixed) {
  const auto g = fixtures::ne_grid();
  SwingState s{Eigen::VectorXd::LinSpaced(10, 0, 1), Eigen::VectorXd::Constant(10, 0.5)};
  const auto d = rhs(s, g);
  EXPECT_EQ(d.angles(0), 0.0);
  EXPECT_EQ(d.speed_deviations(0), 0.0);
  EXPECT_EQ(d.angles(3), 0.5);
  const auto pe = electrical_power(s.angles, g);
  const auto& p = g.params();
  const double expected = std::numbers::pi * 60.0 / p.inertia(4) * (p.mech_power(4) - p.damping(4) * 0.5 - pe(4));
  EXPECT_NEAR(d.speed_deviations(4), expected, 1e-12);
  s.angles(2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(rhs(s, g), IntegrationError);
}

TEST(Swing, EquilibriumOfConfiguredGrids) {
  const auto ne = fixtures::ne_grid();
  const auto eq = find_equilibrium(ne);
  const Eigen::VectorXd expected = (Eigen::VectorXd(10) << 0, 0.3, 0.35, 0.4, 0.45, 0.4, 0.35, 0.5, 0.3, 0.45).finished();
  EXPECT_LT((eq.angles - expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(eq.speed_deviations.norm(), 0.0);

  const auto three = load_grid(fixtures::config_path("three_machine.json"));
  const auto eq3 = find_equilibrium(three);
  EXPECT_NEAR(eq3.angles(1), std::numbers::pi / 6, 1e-10);
  EXPECT_NEAR(eq3.angles(2), std::numbers::pi / 6, 1e-10);
}

TEST(Swing, NoEquilibriumThrows) {
  EXPECT_THROW(find_equilibrium(fixtures::smib(5.0, 1.0, 1.5)), EquilibriumError);
}

TEST(Swing, SampleCount) {
  EXPECT_EQ(sample_count(4.0, 1.0 / 15.0), 61);
  EXPECT_EQ(sample_count(1.0, 0.3), 4);
  EXPECT_EQ(sample_count(0.5, 1.0), 1);
}

TEST(Swing, EquilibriumIsPreserved) {
  const auto g = load_grid(fixtures::config_path("three_machine.json"));
  const auto traj = simulate(g, find_equilibrium(g), 4.0, 1.0 / 15.0);
  EXPECT_EQ(traj.samples(), 61);
  EXPECT_LE(traj.speed_deviations.cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(traj.times.back(), 4.0);
}

TEST(Swing, EnergyConservedWithoutDamping) {
  // Lossless SMIB: H/(pi f) w^2 / 2 - Pm d - cos(d) is invariant.
  const auto g = fixtures::smib(5.0, 1.0, 0.5, 0.0);
  const auto eq = find_equilibrium(g);
  const auto tr = simulate(g, disturbed_init(g, eq, 2, 0.3, 1.0), 5.0, 0.05);
  const double m = 5.0 / (std::numbers::pi * 60.0);
  auto energy = [&](Eigen::Index k) {
    const double d = tr.angles(1, k), w = tr.speed_deviations(1, k);
    return 0.5 * m * w * w - 0.5 * d - std::cos(d);
  };
  for (Eigen::Index k = 0; k < tr.samples(); ++k) EXPECT_NEAR(energy(k), energy(0), 1e-7);
}

TEST(Swing, DisturbanceAndObservation) {
  const auto g = fixtures::ne_grid();
  const auto eq = find_equilibrium(g);
  const auto init = disturbed_init(g, eq, 8, 1.5, 3.0);
  EXPECT_NEAR(init.angles(7), 0.5 + 1.5, 1e-8);
  EXPECT_EQ(init.speed_deviations(7), 3.0);
  EXPECT_EQ(init.speed_deviations.sum(), 3.0);
  EXPECT_THROW(disturbed_init(g, eq, 1, 0.1, 0.0), DomainError);
  EXPECT_THROW(disturbed_init(g, eq, 11, 0.1, 0.0), DomainError);

  const auto traj = simulate(g, init, 4.0, 1.0 / 15.0);
  const auto seq = observe(traj);
  EXPECT_EQ(seq.tasks(), 9);
  EXPECT_EQ(seq.snapshot_count(), 61);
  EXPECT_EQ(seq.labels().front(), "gen2");
  EXPECT_EQ(seq.labels().back(), "gen10");
  EXPECT_EQ(seq.values().row(6), traj.speed_deviations.row(7));
  EXPECT_DOUBLE_EQ(seq.sample_period(), 1.0 / 15.0);
}

TEST(Swing, SimulateValidatesArguments) {
  const auto g = fixtures::smib();
  const auto eq = find_equilibrium(g);
  EXPECT_THROW(simulate(g, eq, 0.0, 0.1), DomainError);
  EXPECT_THROW(simulate(g, eq, 1.0, -0.1), DomainError);
}

TEST(Noise, SeededAndBitIdentical) {
  const auto seq = fixtures::ne_series();
  const auto a = add_noise(seq, 0.1, 7);
  const auto b = add_noise(seq, 0.1, 7);
  const auto c = add_noise(seq, 0.1, 8);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
  EXPECT_EQ(add_noise(seq, 0.0, 7).values(), seq.values());
  const Eigen::MatrixXd diff = a.values() - seq.values();
  const double sd = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
  EXPECT_NEAR(sd, 0.1, 0.02);
  EXPECT_EQ(a.labels(), seq.labels());
  EXPECT_THROW(add_noise(seq, -1.0, 1), DomainError);
}

TEST(Noise, EntryUsesIndexedDraw) {
  const auto seq = fixtures::ne_series();
  const auto a = add_noise(seq, 1.0, 3);
  const NormalStream s(3);
  const auto m = seq.tasks();
  EXPECT_NEAR(a.values()(2, 5) - seq.values()(2, 5), s.draw(static_cast<std::uint64_t>(5 * m + 2)), 1e-12);
}

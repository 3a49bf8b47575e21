#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sde_gridopt/grid.hpp"

using namespace sde_gridopt;

namespace {

// Terminal-optimal density of the OU model A = -1, T = 1: psi ~ e^{-(2/3)(1-t)}.
double ou_weight(double t) { return std::exp(-2.0 * (1.0 - t)) / 12.0; }

// Closed-form cumulative of that density.
double ou_cumulative(double t) {
  return (std::exp(-2.0 / 3.0 * (1.0 - t)) - std::exp(-2.0 / 3.0)) / (1.0 - std::exp(-2.0 / 3.0));
}

}  // namespace

TEST(UniformDensity, Values) {
  const GridDensity one = uniform_density(1.0);
  EXPECT_NEAR(one(0.3), 1.0, 1e-15);
  const GridDensity two = uniform_density(2.0);
  EXPECT_NEAR(two(1.7), 0.5, 1e-15);
  EXPECT_NEAR(two.cumulative_at(1.0), 0.5, 1e-15);
  EXPECT_EQ(two.cumulative_at(2.0), 1.0);
  EXPECT_EQ(two.cumulative().back(), 1.0);
  EXPECT_THROW(uniform_density(0.0), Error);
  EXPECT_THROW(uniform_density(-1.0), Error);
}

TEST(DensityFromWeight, ConstantWeightIsUniform) {
  const GridDensity d = density_from_weight(3.0, [](double) { return 5.0; });
  for (double t : {0.0, 1.1, 3.0}) EXPECT_NEAR(d(t), 1.0 / 3.0, 1e-14);
}

TEST(DensityFromWeight, OuTerminalWeight) {
  const GridDensity d = density_from_weight(1.0, ou_weight);
  const double a = -1.0;
  for (double t : {0.0, 0.25, 0.625, 1.0}) {  // mesh nodes
    const double expected = (2 * a / 3) * std::exp(2 * a / 3 * (1 - t)) / (std::exp(2 * a / 3) - 1);
    EXPECT_NEAR(d(t), expected, 1e-10) << t;
  }
  EXPECT_NEAR(d(1.0) / d(0.0), std::exp(2.0 / 3.0), 1e-12);
}

TEST(DensityFromWeight, VanishingTerminalWeightHasCubeRootTail) {
  // S-like weight: linear decay to zero at T.
  const GridDensity d = density_from_weight(1.0, [](double t) { return 1.0 - t; });
  EXPECT_EQ(d(1.0), 0.0);
  EXPECT_TRUE(d.vanishes_at_terminal());
  EXPECT_FALSE(d.has_interior_zero());
  const double c = d(1.0 - 1e-3) / std::cbrt(1e-3);
  EXPECT_NEAR(d(1.0 - 8e-3) / std::cbrt(8e-3), c, 1e-2 * c);
}

TEST(DensityFromWeight, AlwaysNormalised) {
  for (auto w : {+[](double t) { return 1.0 + t * t; }, +[](double t) { return std::exp(3 * t); },
                 +[](double t) { return 2.0 - t; }}) {
    const GridDensity d = density_from_weight(2.0, w);
    const auto v = d.values();
    double simpson = v.front() + v.back();
    for (std::size_t j = 1; j + 1 < v.size(); ++j) simpson += (j % 2 ? 4.0 : 2.0) * v[j];
    simpson *= d.mesh_step() / 3.0;
    EXPECT_NEAR(simpson, 1.0, 1e-10);
    EXPECT_EQ(d.cumulative().back(), 1.0);
    EXPECT_EQ(d.cumulative().front(), 0.0);
  }
}

TEST(DensityFromWeight, Errors) {
  EXPECT_THROW(density_from_weight(1.0, [](double) { return 0.0; }), Error);
  EXPECT_THROW(density_from_weight(1.0, [](double t) { return t - 0.5; }), Error);
}

TEST(GridFromDensity, UniformQuarters) {
  const TimeGrid g = grid_from_density(uniform_density(1.0), 4);
  ASSERT_EQ(g.size(), 4u);
  const double expected[] = {0, 0.25, 0.5, 0.75, 1};
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(g[k], expected[k], 1e-14);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[4], 1.0);
}

TEST(GridFromDensity, SingleStep) {
  const TimeGrid g = grid_from_density(uniform_density(2.5), 1);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 2.5);
}

TEST(GridFromDensity, OuOptimalQuantile) {
  const GridDensity d = density_from_weight(1.0, ou_weight);
  const double q = ou_cumulative(0.5);
  EXPECT_NEAR(q, 0.41743, 1e-5);
  EXPECT_NEAR(d.cumulative_at(0.5), q, 1e-9);
  EXPECT_NEAR(d.inverse_cumulative(q), 0.5, 1e-9);
}

TEST(GridFromDensity, RejectsInteriorZero) {
  std::vector<double> v(9, 1.0);
  v[4] = 0.0;
  const GridDensity d = GridDensity::from_samples(1.0, v);
  EXPECT_TRUE(d.has_interior_zero());
  EXPECT_THROW(grid_from_density(d, 8), Error);
}

TEST(GridFromDensity, StepsTrackInverseDensity) {
  const GridDensity d = density_from_weight(1.0, ou_weight);
  const std::size_t n = 4096;
  const TimeGrid g = grid_from_density(d, n);
  for (int i = 1; i <= 9; ++i) {
    const double tau = i / 10.0;
    const std::size_t k = std::size_t(std::floor(n * tau));
    const double expected = 1.0 / d(d.inverse_cumulative(tau));
    EXPECT_NEAR(n * g.step(k), expected, 0.01 * expected) << tau;
  }
}

TEST(GridFromDensity, DoublingPreservesSharedQuantiles) {
  const GridDensity d = density_from_weight(1.0, [](double t) { return 1.0 + 10.0 * t * t * (1.0 - t); });
  const std::size_t n = 100;
  const TimeGrid coarse = grid_from_density(d, n);
  const TimeGrid fine = grid_from_density(d, 2 * n);
  for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(coarse[k], fine[2 * k], 1e-10);
}

TEST(GridFromDensity, InversionIsConsistentWithCumulative) {
  const GridDensity d = density_from_weight(2.0, [](double t) { return (2.0 - t) * (1.0 + std::sin(3 * t) * 0.5); });
  for (int i = 1; i < 200; ++i) {
    const double u = i / 200.0;
    EXPECT_NEAR(d.cumulative_at(d.inverse_cumulative(u)), u, 1e-12);
  }
}

TEST(EmpiricalDensity, Counting) {
  const TimeGrid g = uniform_grid(2.0, 8);
  EXPECT_DOUBLE_EQ(empirical_density(g, 0.0, 1.0), 5.0 / 8.0);  // (N/2 + 1) / N
  EXPECT_DOUBLE_EQ(empirical_density(g, 0.0, 2.0), 9.0 / 8.0);  // (N + 1) / N
  EXPECT_THROW(empirical_density(g, 1.0, 0.5), Error);
  EXPECT_THROW(empirical_density(g, -0.1, 0.5), Error);
}

TEST(EmpiricalDensity, ConvergesToDensityMass) {
  const GridDensity d = density_from_weight(1.0, ou_weight);
  const std::size_t n = 4096;
  const double expected = 1.0 - ou_cumulative(0.5);
  EXPECT_NEAR(expected, 0.58257, 1e-5);
  EXPECT_NEAR(empirical_density(grid_from_density(d, n), 0.5, 1.0), expected, 2.0 / n);
}

TEST(TimeGrid, Invariants) {
  EXPECT_THROW(TimeGrid({0.0}), Error);
  EXPECT_THROW(TimeGrid({0.1, 1.0}), Error);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5, 1.0}), Error);
  const TimeGrid g({0.0, 0.25, 1.0});
  EXPECT_EQ(g.size(), 2u);
  EXPECT_DOUBLE_EQ(g.step(1), 0.75);
}

TEST(TimeGrid, CsvRoundTrip) {
  const TimeGrid g = grid_from_density(density_from_weight(1.0, ou_weight), 37);
  std::stringstream ss;
  write_grid_csv(ss, g);
  EXPECT_EQ(ss.str().substr(0, 2), "t\n");
  const TimeGrid back = read_grid_csv(ss);
  ASSERT_EQ(back.size(), g.size());
  for (std::size_t k = 0; k <= g.size(); ++k) EXPECT_EQ(back[k], g[k]);
}

TEST(GridDensity, CsvHeader) {
  std::ostringstream os;
  uniform_density(1.0, 4).write_csv(os);
  EXPECT_EQ(os.str().substr(0, 6), "t,psi\n");
}

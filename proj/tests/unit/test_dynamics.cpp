#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "abl/cases.hpp"
#include "abl/dynamics.hpp"
#include "abl/errors.hpp"
#include "abl/operators.hpp"
#include "manufactured.hpp"
#include "oracles.hpp"

namespace abl {
namespace {

SgsState quiet_closure(const Grid& g, double nu_t = 0.0, double nu_T = 0.0) {
  SgsState s;
  s.nu_t = ScalarField(g, Staggering::Center, nu_t);
  s.gamma.assign(g.nz, 1.0);
  s.nu_T.assign(g.nz, nu_T);
  return s;
}

PhysicsParams inviscid_physics() {
  PhysicsParams p;
  p.coriolis = 0.0;
  p.gravity = 0.0;
  p.top_theta_gradient = 0.0;
  return p;
}

// Random velocity with the divergent part removed.
FlowState random_solenoidal_state(const Grid& g, std::uint64_t seed) {
  FlowState s(g, 265.0);
  s.u.values() = testing::random_values(s.u.size(), seed, 1.0);
  s.v.values() = testing::random_values(s.v.size(), seed + 1, 1.0);
  s.w.values() = testing::random_values(s.w.size(), seed + 2, 1.0);
  std::fill(s.w.data(), s.w.data() + g.plane_size(), 0.0);
  std::fill(s.w.data() + g.nz * g.plane_size(), s.w.data() + s.w.size(), 0.0);
  PoissonSolver p(g);
  const ScalarField phi = p.solve(divergence(g, {s.u, s.v, s.w}));
  subtract_gradient(g, phi, s.u, s.v, s.w);
  return s;
}

double kinetic_energy_rate(const Grid& g, const FlowState& s, const MomentumTendency& t) {
  double sum = 0.0;
  for (std::size_t n = 0; n < s.u.size(); ++n)
    sum += s.u.data()[n] * t.u.data()[n] + s.v.data()[n] * t.v.data()[n];
  for (std::size_t n = g.plane_size(); n < g.cell_count(); ++n) sum += s.w.data()[n] * t.w.data()[n];
  return sum;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

CaseConfig small_gabls(int n = 16) {
  CaseConfig c = CaseConfig::gabls1();
  c.nx = c.ny = c.nz = n;
  return c;
}

TEST(MomentumRhs, ManufacturedSolutionIsSecondOrder) {
  const testing::ManufacturedErrors e1 = testing::manufactured_errors(16);
  const testing::ManufacturedErrors e2 = testing::manufactured_errors(32);
  EXPECT_GE(std::log2(e1.u / e2.u), 1.9);
  EXPECT_GE(std::log2(e1.v / e2.v), 1.9);
  EXPECT_GE(std::log2(e1.w / e2.w), 1.9);
  EXPECT_GE(std::log2(e1.theta / e2.theta), 1.9);
}

TEST(MomentumRhs, GeostrophicWindIsSteady) {
  const Grid g = Grid::make(8, 8, 8, 400, 400, 400, 1.0);
  FlowState s(g, 265.0);
  PhysicsParams p;
  p.ug = 8.0;
  p.vg = -1.5;
  s.u.fill(p.ug);
  s.v.fill(p.vg);
  const MomentumTendency t = momentum_rhs(g, s, quiet_closure(g), WallState{}, p, g.z_center(0));
  EXPECT_LT(max_abs(t.u), 1e-14);
  EXPECT_LT(max_abs(t.v), 1e-14);
  EXPECT_LT(max_abs(t.w), 1e-14);
}

TEST(MomentumRhs, CoriolisTurnsTheAgeostrophicWind) {
  const Grid g = Grid::make(4, 4, 4, 400, 400, 400, 1.0);
  FlowState s(g, 265.0);
  PhysicsParams p;
  s.u.fill(p.ug + 2.0);
  const MomentumTendency t = momentum_rhs(g, s, quiet_closure(g), WallState{}, p, g.z_center(0));
  for (double x : t.u.values()) EXPECT_NEAR(x, 0.0, 1e-15);
  for (double x : t.v.values()) EXPECT_NEAR(x, -p.coriolis * 2.0, 1e-15);
}

TEST(MomentumRhs, PlaneUniformTemperatureExertsNoBuoyancy) {
  const Grid g = Grid::make(8, 8, 8, 400, 400, 400, 1.0);
  FlowState s(g, 265.0);
  for (int k = 0; k < g.nz; ++k)
    for (double& x : s.theta.level(k)) x = 265.0 + 0.01 * g.z_center(k);
  PhysicsParams p = inviscid_physics();
  p.gravity = 9.81;
  const MomentumTendency t = momentum_rhs(g, s, quiet_closure(g), WallState{}, p, g.z_center(0));
  EXPECT_LT(max_abs(t.w), 1e-12);
}

TEST(MomentumRhs, WarmAnomalyRises) {
  const Grid g = Grid::make(4, 4, 4, 40, 40, 40, 0.0);
  FlowState s(g, 265.0);
  s.theta(1, 1, 1) += 1.0;
  s.theta(1, 1, 2) += 1.0;
  PhysicsParams p = inviscid_physics();
  p.gravity = 9.81;
  p.theta0 = 265.0;
  const MomentumTendency t = momentum_rhs(g, s, quiet_closure(g), WallState{}, p, g.z_center(0));
  EXPECT_NEAR(t.w(1, 1, 2), 9.81 / 265.0 * (1.0 - 1.0 / 16.0), 1e-14);
}

TEST(MomentumRhs, AdvectionConservesKineticEnergy) {
  const Grid g = Grid::make(12, 10, 8, 1.2, 1.0, 0.8, 0.0);
  const FlowState s = random_solenoidal_state(g, 5);
  ASSERT_LT(max_abs(divergence(g, {s.u, s.v, s.w})), 1e-11);
  const MomentumTendency t =
      momentum_rhs(g, s, quiet_closure(g), WallState{}, inviscid_physics(), g.z_center(0));
  double scale = 0.0;
  for (double x : t.u.values()) scale += std::abs(x);
  EXPECT_LT(std::abs(kinetic_energy_rate(g, s, t)), 1e-12 * scale);
}

TEST(MomentumRhs, ViscosityAndTractionDissipate) {
  const Grid g = Grid::make(8, 8, 8, 1.0, 1.0, 1.0, 0.0);
  FlowState s = random_solenoidal_state(g, 9);
  ScalarField nut(g, Staggering::Center);
  nut.values() = testing::random_values(nut.size(), 10, 0.02);
  for (double& x : nut.values()) x = std::abs(x);
  SgsState c = quiet_closure(g);
  c.nu_t = nut;
  WallState wall;
  wall.u_tau = 0.3;
  wall.slip_speed = 1.0;
  const MomentumTendency t = momentum_rhs(g, s, c, wall, inviscid_physics(), g.z_center(0));
  EXPECT_LT(kinetic_energy_rate(g, s, t), 0.0);
}

TEST(MomentumRhs, WallTractionRemovesSurfaceStress) {
  const Grid g = Grid::make(4, 4, 6, 40, 40, 60, 1.0);
  FlowState s(g, 265.0);
  s.u.fill(5.0);
  WallState wall;
  wall.u_tau = 0.3;
  wall.slip_speed = 5.0;
  PhysicsParams p = inviscid_physics();
  p.body_force_x = 1e-3;
  const MomentumTendency t = momentum_rhs(g, s, quiet_closure(g), wall, p, g.z_center(0));
  for (int k = 0; k < g.nz; ++k)
    for (double x : t.u.level(k))
      EXPECT_NEAR(x, 1e-3 - (k == 0 ? 0.09 / g.dz : 0.0), 1e-14);
  EXPECT_LT(max_abs(t.v), 1e-15);
}

TEST(MomentumRhs, MeanFieldViscosityActsOnPlaneMean) {
  const Grid g = Grid::make(4, 4, 10, 40, 40, 100, 0.0);
  FlowState s(g, 265.0);
  for (int k = 0; k < g.nz; ++k) {
    const double z = g.z_center(k);
    for (double& x : s.u.level(k)) x = 1e-3 * z * z;
  }
  const double nuT = 0.7;
  const MomentumTendency t =
      momentum_rhs(g, s, quiet_closure(g, 0.0, nuT), WallState{}, inviscid_physics(), 0.5 * g.dz);
  for (int k = 1; k + 1 < g.nz; ++k)
    for (double x : t.u.level(k)) EXPECT_NEAR(x, nuT * 2e-3, 1e-13);
}

TEST(EnergyRhs, LinearConductionColumnIsSteady) {
  const Grid g = Grid::make(4, 4, 8, 40, 40, 80, 1.0);
  FlowState s(g, 0.0);
  const double grad = 0.01, kappa = 0.4, nuT = 0.3, pr = 0.5;
  for (int k = 0; k < g.nz; ++k)
    for (double& x : s.theta.level(k)) x = 265.0 + grad * g.z_center(k);
  SgsState c = quiet_closure(g, kappa * pr, nuT);
  PhysicsParams p = inviscid_physics();
  p.top_theta_gradient = grad;
  WallState wall;
  // Surface flux equal to the conducted flux K d(theta)/dz through the lowest face.
  wall.heat_flux = -(kappa + nuT / pr) * grad;
  const ScalarField r = energy_rhs(g, s, c, wall, p, pr);
  EXPECT_LT(max_abs(r), 1e-13);
}

TEST(EnergyRhs, DomainIntegralEqualsBoundaryFluxes) {
  const Grid g = Grid::make(8, 6, 8, 80, 60, 80, 1.0);
  FlowState s = random_solenoidal_state(g, 17);
  s.theta.values() = testing::random_values(s.theta.size(), 20, 2.0);
  for (double& x : s.theta.values()) x += 265.0;
  SgsState c = quiet_closure(g, 0.0, 0.2);
  c.nu_t.values() = testing::random_values(c.nu_t.size(), 21, 0.1);
  for (double& x : c.nu_t.values()) x = std::abs(x);
  PhysicsParams p = inviscid_physics();
  p.top_theta_gradient = 0.01;
  WallState wall;
  wall.heat_flux = -0.02;
  const ScalarField r = energy_rhs(g, s, c, wall, p, 1.0);

  double integral = 0.0;
  for (double x : r.values()) integral += x;
  integral *= g.dx * g.dy * g.dz;
  double top = 0.0;
  for (double x : c.nu_t.level(g.nz - 1)) top += (x + 0.2) * p.top_theta_gradient;
  top *= g.dx * g.dy;
  const double expected = wall.heat_flux * g.lx * g.ly + top;
  EXPECT_NEAR(integral, expected, 1e-12 * std::abs(expected));
}

TEST(EnergyRhs, DisabledEnergyFreezesTemperature) {
  const Grid g = Grid::make(4, 4, 4, 40, 40, 40, 1.0);
  FlowState s = random_solenoidal_state(g, 3);
  s.theta.values() = testing::random_values(s.theta.size(), 4, 2.0);
  PhysicsParams p = inviscid_physics();
  p.energy = false;
  WallState wall;
  wall.heat_flux = -0.1;
  EXPECT_EQ(max_abs(energy_rhs(g, s, quiet_closure(g, 0.1), wall, p, 1.0)), 0.0);
}

TEST(Solver, StateAtRestIsAFixedPoint) {
  CaseConfig c = small_gabls(8);
  c.physics.coriolis = 0.0;
  c.physics.energy = false;
  Solver solver(c.grid(), c.solver_config());
  FlowState s(c.grid(), 265.0);
  const FlowState before = s;
  solver.advance(s, 1.0);
  EXPECT_EQ(s.u, before.u);
  EXPECT_EQ(s.v, before.v);
  EXPECT_EQ(s.w, before.w);
  EXPECT_EQ(s.theta, before.theta);
  EXPECT_DOUBLE_EQ(s.time, 1.0);
  EXPECT_EQ(s.step, 1u);
}

TEST(Solver, ProjectionIsIdempotent) {
  const CaseConfig c = small_gabls(8);
  const Grid g = c.grid();
  Solver solver(g, c.solver_config());
  FlowState s(g, 265.0);
  s.u.values() = testing::random_values(s.u.size(), 40, 1.0);
  s.v.values() = testing::random_values(s.v.size(), 41, 1.0);
  solver.project(s.u, s.v, s.w);
  EXPECT_LT(max_abs(divergence(g, {s.u, s.v, s.w})), 1e-12);
  const FlowState once = s;
  solver.project(s.u, s.v, s.w);
  for (std::size_t n = 0; n < s.u.size(); ++n) EXPECT_NEAR(s.u.data()[n], once.u.data()[n], 1e-13);
  EXPECT_EQ(s.w.level(0)[0], 0.0);
  EXPECT_EQ(s.w.level(g.nz)[0], 0.0);
}

TEST(Solver, GablsStepStaysSolenoidal) {
  const CaseConfig c = small_gabls(16);
  const Grid g = c.grid();
  Solver solver(g, c.solver_config());
  FlowState s = init_gabls(c, c.seed);
  solver.step(s, 0.2);
  EXPECT_LT(max_abs(divergence(g, {s.u, s.v, s.w})), 1e-8 * c.physics.ug / g.delta);
  EXPECT_TRUE(s.u.all_finite());
  EXPECT_TRUE(s.theta.all_finite());
  EXPECT_DOUBLE_EQ(s.time, 0.2);
}

TEST(Solver, OversizedStepThrows) {
  const CaseConfig c = small_gabls(8);
  Solver solver(c.grid(), c.solver_config());
  FlowState s = init_gabls(c, c.seed);
  solver.evaluate(s);
  const double limit = solver.limits(s).dt();
  EXPECT_THROW(solver.step(s, 10.0 * limit), CflViolation);
  EXPECT_EQ(s.step, 0u);
}

TEST(Solver, StableStepBelowMinimumThrows) {
  CaseConfig c = small_gabls(8);
  c.stepper.dt_min = 100.0;
  c.stepper.dt_max = 100.0;
  Solver solver(c.grid(), c.solver_config());
  FlowState s = init_gabls(c, c.seed);
  EXPECT_THROW(solver.advance(s), CflViolation);
}

TEST(Solver, AdvanceRespectsCflTarget) {
  const CaseConfig c = small_gabls(8);
  Solver solver(c.grid(), c.solver_config());
  FlowState s = init_gabls(c, c.seed);
  const double dt = solver.advance(s);
  EXPECT_GT(dt, 0.0);
  EXPECT_LE(solver.last_cfl(), c.stepper.cfl_target * (1.0 + 1e-12));
  EXPECT_LE(solver.advance(s, 0.25 * dt), 0.25 * dt);
}

TEST(Solver, NegativeEnergyIsClipped) {
  CaseConfig c = small_gabls(8);
  c.sgs.model = SgsModel::MfevTkeSmg;
  Solver solver(c.grid(), c.solver_config());
  FlowState s(c.grid(), 265.0);
  s.u.fill(c.physics.ug);
  s.e.fill(1e-4);
  s.e(2, 3, 4) = -1e-3;
  solver.advance(s, 0.5);
  EXPECT_GT(solver.clip_events(), 0u);
  for (double x : s.e.values()) EXPECT_GE(x, 0.0);
}

TEST(Solver, SamplingHeightOutsideColumnIsRejected) {
  CaseConfig c = small_gabls(8);
  SolverConfig sc = c.solver_config();
  sc.sampling_height = c.lz + 1.0;
  EXPECT_THROW(Solver(c.grid(), sc), ConfigError);
}

TEST(Solver, UpperCutoffFollowsTheShearLayerWithoutAJet) {
  // Shear 0.04 1/s up to 200 m above the bottom face, then 1e-4 1/s: no interior
  // maximum, so the depth is searched from the wall. The 0.002 1/s crossing,
  // interpolated between gradient midpoints 201 m and 226 m, lies at 223.6 m.
  CaseConfig c = small_gabls(16);
  c.sgs.mfev_upper_cutoff = 0.5;
  const Grid g = c.grid();
  Solver solver(g, c.solver_config());
  FlowState s(g, 265.0);
  for (int k = 0; k < g.nz; ++k) {
    const double h = g.z_center(k) - g.z_bottom;
    const double u = c.physics.ug * std::min(h / 200.0, 1.0) + 1e-4 * h;
    for (double& x : s.u.level(k)) x = u;
  }
  solver.evaluate(s);
  const double z_cut = 0.5 * 223.6;
  for (int k = 0; k < g.nz; ++k) {
    if (g.z_center(k) > z_cut) {
      EXPECT_EQ(solver.sgs().nu_T[k], 0.0) << k;
      EXPECT_EQ(solver.sgs().gamma[k], 1.0) << k;
    } else {
      EXPECT_GT(solver.sgs().nu_T[k], 0.0) << k;
    }
  }
}

TEST(InterpolateLevels, LinearBetweenCentersAndClampedOutside) {
  const Grid g = Grid::make(2, 2, 4, 10, 10, 40, 0.0);
  const Profile f{1.0, 2.0, 4.0, 8.0};
  EXPECT_DOUBLE_EQ(interpolate_levels(g, f, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(interpolate_levels(g, f, 20.0), 3.0);
  EXPECT_DOUBLE_EQ(interpolate_levels(g, f, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(interpolate_levels(g, f, 40.0), 8.0);
}

}  // namespace
}  // namespace abl

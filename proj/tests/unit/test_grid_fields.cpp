#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "abl/errors.hpp"
#include "abl/grid.hpp"
#include "abl/operators.hpp"
#include "abl/poisson.hpp"
#include "oracles.hpp"

namespace abl {
namespace {

// Copy, so range-for over a temporary field stays valid.
std::vector<double> values_of(const ScalarField& f) { return f.values(); }

constexpr double kPi = 3.14159265358979323846;

Grid small_grid(int n = 8) { return Grid::make(n, n, n, 400.0, 400.0, 400.0, 1.0); }

TEST(Grid, SpacingsAndFilterWidth) {
  const Grid g = Grid::make(16, 8, 10, 400.0, 200.0, 101.0, 1.0);
  EXPECT_DOUBLE_EQ(g.dx, 25.0);
  EXPECT_DOUBLE_EQ(g.dy, 25.0);
  EXPECT_DOUBLE_EQ(g.dz, 10.0);
  EXPECT_NEAR(g.delta * g.delta * g.delta, g.dx * g.dy * g.dz, 1e-12 * g.dx * g.dy * g.dz);
  EXPECT_DOUBLE_EQ(g.z_face(0), 1.0);
  EXPECT_DOUBLE_EQ(g.z_center(0), 6.0);
  EXPECT_DOUBLE_EQ(g.z_face(10), 101.0);
}

TEST(Grid, RejectsInvalidSizes) {
  EXPECT_THROW(Grid::make(0, 8, 8, 1, 1, 1), ConfigError);
  EXPECT_THROW(Grid::make(8, 8, 8, -1, 1, 1), ConfigError);
  EXPECT_THROW(Grid::make(8, 8, 8, 1, 1, 1, 2.0), ConfigError);
  try {
    Grid::make(8, 0, 8, 1, 1, 1);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "grid.ny");
  }
}

TEST(Grid, PeriodicWrap) {
  const Grid g = small_grid();
  EXPECT_EQ(g.wrap_x(-1), 7);
  EXPECT_EQ(g.wrap_x(8), 0);
  EXPECT_EQ(g.wrap_y(-9), 7);
}

TEST(PlaneAverage, ConstantField) {
  const Grid g = small_grid();
  const Profile p = plane_average(ScalarField(g, Staggering::Center, 3.5));
  for (double x : p) EXPECT_EQ(x, 3.5);
}

TEST(PlaneAverage, ZeroMeanMode) {
  const Grid g = small_grid();
  ScalarField f(g, Staggering::Center);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) f(i, j, k) = std::sin(2 * kPi * g.x_center(i) / g.lx);
  for (double x : plane_average(f)) EXPECT_NEAR(x, 0.0, 1e-12);
}

TEST(PlaneAverage, MatchesReferenceSumAndIsLinear) {
  const Grid g = small_grid();
  ScalarField f(g, Staggering::ZFace), h(g, Staggering::ZFace), c(g, Staggering::ZFace);
  f.values() = testing::random_values(f.size(), 1);
  h.values() = testing::random_values(h.size(), 2);
  for (std::size_t n = 0; n < c.size(); ++n) c.data()[n] = 2.0 * f.data()[n] - 0.5 * h.data()[n];
  const Profile pf = plane_average(f), ph = plane_average(h), pc = plane_average(c);
  ASSERT_EQ(pf.size(), std::size_t(g.nz + 1));
  for (int k = 0; k <= g.nz; ++k) {
    double ref = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) ref += f(i, j, k);
    ref /= g.plane_size();
    EXPECT_NEAR(pf[k], ref, 1e-12 * std::max(1.0, std::abs(ref)));
    EXPECT_NEAR(pc[k], 2.0 * pf[k] - 0.5 * ph[k], 1e-12);
  }
}

TEST(StrainRate, UniformFlowIsStrainFree) {
  const Grid g = small_grid();
  ScalarField u(g, Staggering::XFace, 3.0), v(g, Staggering::YFace, -1.0), w(g, Staggering::ZFace);
  const StrainTensorField s = strain_rate(g, {u, v, w});
  for (std::size_t n = 0; n < s.xx.size(); ++n) EXPECT_EQ(s.contraction(n), 0.0);
}

TEST(StrainRate, LinearShearIsExact) {
  const Grid g = small_grid();
  const double a = 0.02;
  ScalarField u(g, Staggering::XFace), v(g, Staggering::YFace), w(g, Staggering::ZFace);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) u(i, j, k) = a * g.z_center(k);
  const StrainTensorField s = strain_rate(g, {u, v, w});
  // One-sided end stencils are exact on linear profiles too.
  for (std::size_t n = 0; n < s.xz.size(); ++n) {
    EXPECT_NEAR(s.xz.data()[n], a / 2, 1e-14);
    EXPECT_EQ(s.xx.data()[n], 0.0);
    EXPECT_EQ(s.xy.data()[n], 0.0);
    EXPECT_EQ(s.yz.data()[n], 0.0);
  }
}

TEST(StrainRate, AnalyticFieldConvergesSecondOrder) {
  auto error = [](int n) {
    const Grid g = Grid::make(n, n, n, 1.0, 1.0, 1.0, 0.0);
    const double kx = 2 * kPi, m = kPi;
    ScalarField u(g, Staggering::XFace), v(g, Staggering::YFace), w(g, Staggering::ZFace);
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) u(i, j, k) = std::sin(kx * g.x_face(i)) * std::cos(m * g.z_center(k));
    const StrainTensorField s = strain_rate(g, {u, v, w});
    double e = 0.0;
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
          const double x = g.x_center(i), z = g.z_center(k);
          e = std::max(e, std::abs(s.xx(i, j, k) - kx * std::cos(kx * x) * std::cos(m * z)));
          e = std::max(e, std::abs(s.xz(i, j, k) + 0.5 * m * std::sin(kx * x) * std::sin(m * z)));
        }
    return e;
  };
  const double e16 = error(16), e32 = error(32);
  EXPECT_GT(std::log2(e16 / e32), 1.8);
}

TEST(StrainRate, TraceEqualsDivergence) {
  const Grid g = small_grid();
  ScalarField u(g, Staggering::XFace), v(g, Staggering::YFace), w(g, Staggering::ZFace);
  u.values() = testing::random_values(u.size(), 3);
  v.values() = testing::random_values(v.size(), 4);
  w.values() = testing::random_values(w.size(), 5);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) w(i, j, 0) = w(i, j, g.nz) = 0.0;
  const StrainTensorField s = strain_rate(g, {u, v, w});
  const ScalarField d = divergence(g, {u, v, w});
  for (std::size_t n = 0; n < d.size(); ++n)
    EXPECT_NEAR(s.xx.data()[n] + s.yy.data()[n] + s.zz.data()[n], d.data()[n], 1e-14);
}

TEST(Divergence, UniformFlowIsZero) {
  const Grid g = small_grid();
  ScalarField u(g, Staggering::XFace, 5.0), v(g, Staggering::YFace, 2.0), w(g, Staggering::ZFace);
  for (double x : values_of(divergence(g, {u, v, w}))) EXPECT_EQ(x, 0.0);
}

TEST(Divergence, SineModeMatchesDiscreteDerivative) {
  const Grid g = small_grid(16);
  ScalarField u(g, Staggering::XFace), v(g, Staggering::YFace), w(g, Staggering::ZFace);
  const double kx = 2 * kPi / g.lx;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) u(i, j, k) = std::sin(kx * g.x_face(i));
  const ScalarField d = divergence(g, {u, v, w});
  // (sin(k(x+h/2)) - sin(k(x-h/2)))/h = 2 sin(kh/2)/h cos(kx)
  const double factor = 2.0 * std::sin(kx * g.dx / 2) / g.dx;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        EXPECT_NEAR(d(i, j, k), factor * std::cos(kx * g.x_center(i)), 1e-13);
}

TEST(Operators, DivergenceOfGradientMatchesAssembledLaplacian) {
  const Grid g = small_grid(8);
  ScalarField phi(g, Staggering::Center);
  phi.values() = testing::random_values(phi.size(), 6);
  const GradientField gr = gradient(g, phi);
  const ScalarField lap = divergence(g, {gr.x, gr.y, gr.z});
  const ScalarField lap2 = apply_laplacian(g, phi);
  const auto a = testing::laplacian_matrix(g);
  const Eigen::Map<const Eigen::VectorXd> p(phi.data(), phi.size());
  const Eigen::VectorXd ref = a * p;
  for (std::size_t n = 0; n < lap.size(); ++n) {
    EXPECT_NEAR(lap.data()[n], ref[n], 1e-12 * std::max(1.0, std::abs(ref[n])));
    EXPECT_NEAR(lap2.data()[n], ref[n], 1e-12 * std::max(1.0, std::abs(ref[n])));
  }
}

TEST(Operators, VerticalDerivativeExactOnQuadratics) {
  Profile f(6);
  const double dz = 0.5;
  for (int k = 0; k < 6; ++k) {
    const double z = k * dz;
    f[k] = 1.0 + 2.0 * z - 3.0 * z * z;
  }
  const Profile d = vertical_derivative(f, dz);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(d[k], 2.0 - 6.0 * k * dz, 1e-12);
}

}  // namespace
}  // namespace abl

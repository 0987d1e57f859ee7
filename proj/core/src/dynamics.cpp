#include "abl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "abl/diagnostics.hpp"
#include "abl/errors.hpp"
#include "abl/operators.hpp"

namespace abl {
namespace {

// Williamson low-storage RK3 coefficients (Wray's variant).
constexpr std::array<double, 3> kRkAlpha{0.0, -5.0 / 9.0, -153.0 / 128.0};
constexpr std::array<double, 3> kRkBeta{1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0};
constexpr std::array<double, 3> kRkTime{0.0, 1.0 / 3.0, 3.0 / 4.0};

// Interpolation weights of an absolute height between cell levels.
struct LevelWeight {
  int k0 = 0;
  int k1 = 0;
  double frac = 0.0;
};

LevelWeight level_weight(const Grid& g, double z) {
  const double s = (z - g.z_center(0)) / g.dz;
  if (g.nz == 1 || s <= 0.0) return {0, 0, 0.0};
  if (s >= g.nz - 1) return {g.nz - 1, g.nz - 1, 0.0};
  const int k0 = static_cast<int>(std::floor(s));
  return {k0, k0 + 1, s - k0};
}

inline std::size_t at(int i, int j, int k, int nx, int ny) {
  return (static_cast<std::size_t>(k) * ny + j) * nx + i;
}

}  // namespace

void TimeStepper::validate() const {
  if (!(cfl_target > 0.0)) throw ConfigError("time.cfl", "must be positive");
  if (!(diff_number_target > 0.0)) throw ConfigError("time.diffusion_number", "must be positive");
  if (!(dt_min > 0.0)) throw ConfigError("time.dt_min", "must be positive");
  if (!(dt_max >= dt_min)) throw ConfigError("time.dt_max", "must be >= dt_min");
}

FlowState::FlowState(const Grid& g, double theta_init)
    : u(g, Staggering::XFace),
      v(g, Staggering::YFace),
      w(g, Staggering::ZFace),
      theta(g, Staggering::Center, theta_init),
      e(g, Staggering::Center) {}

double interpolate_levels(const Grid& grid, const Profile& f, double z) {
  const LevelWeight lw = level_weight(grid, z);
  return (1.0 - lw.frac) * f[lw.k0] + lw.frac * f[lw.k1];
}

void momentum_rhs(const Grid& g, const FlowState& s, const SgsState& sgs, const WallState& wall,
                  const PhysicsParams& prm, MomentumTendency& out, double sampling_height) {
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  if (!out.u.same_shape(s.u)) out.u = ScalarField(g, Staggering::XFace);
  if (!out.v.same_shape(s.v)) out.v = ScalarField(g, Staggering::YFace);
  if (!out.w.same_shape(s.w)) out.w = ScalarField(g, Staggering::ZFace);

  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;
  const double* U = s.u.data();
  const double* V = s.v.data();
  const double* W = s.w.data();
  const double* T = s.theta.data();
  const double* nut = sgs.nu_t.data();

  // Total fluctuating viscosity at cell centers.
  std::vector<double> K(g.cell_count());
  for (int k = 0; k < nz; ++k) {
    const double gk = sgs.gamma[k];
    for (std::size_t n = k * plane; n < (k + 1) * plane; ++n) K[n] = prm.nu_mol + gk * nut[n];
  }

  // Mean-field vertical diffusion on <u>, <v>: plane-uniform per level.
  const Profile mu = plane_average(s.u);
  const Profile mv = plane_average(s.v);
  std::vector<double> mf_u(nz, 0.0), mf_v(nz, 0.0);
  {
    std::vector<double> fu(nz + 1, 0.0), fv(nz + 1, 0.0);
    for (int k = 1; k < nz; ++k) {
      const double nu_face = 0.5 * (sgs.nu_T[k - 1] + sgs.nu_T[k]);
      fu[k] = nu_face * (mu[k] - mu[k - 1]) * idz;
      fv[k] = nu_face * (mv[k] - mv[k - 1]) * idz;
    }
    for (int k = 0; k < nz; ++k) {
      mf_u[k] = (fu[k + 1] - fu[k]) * idz;
      mf_v[k] = (fv[k + 1] - fv[k]) * idz;
    }
  }

  // Buoyancy uses theta relative to its plane mean; the plane-uniform part is hydrostatic.
  const Profile mt = plane_average(s.theta);

  // Wall traction scale and local slip sampling.
  const double traction_scale =
      wall.slip_speed > 0.0 ? wall.u_tau * wall.u_tau / wall.slip_speed : 0.0;
  const LevelWeight lw = level_weight(g, sampling_height);

  auto kavg4 = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) {
    return 0.25 * (K[a] + K[b] + K[c] + K[d]);
  };
  // Edge stresses (nu + gamma nu_t)(du_i/dx_j + du_j/dx_i) at their natural locations.
  auto sigma_xy = [&](int i, int j, int k) {  // at (x_i, y_j, z_{k+1/2})
    const int im = i > 0 ? i - 1 : nx - 1;
    const int jm = j > 0 ? j - 1 : ny - 1;
    const double kv = kavg4(at(im, jm, k, nx, ny), at(i, jm, k, nx, ny), at(im, j, k, nx, ny),
                            at(i, j, k, nx, ny));
    return kv * ((U[at(i, j, k, nx, ny)] - U[at(i, jm, k, nx, ny)]) * idy +
                 (V[at(i, j, k, nx, ny)] - V[at(im, j, k, nx, ny)]) * idx);
  };
  auto sigma_xz = [&](int i, int j, int k) {  // at (x_i, y_{j+1/2}, z_k), 0 < k < nz
    const int im = i > 0 ? i - 1 : nx - 1;
    const double kv = kavg4(at(im, j, k - 1, nx, ny), at(i, j, k - 1, nx, ny), at(im, j, k, nx, ny),
                            at(i, j, k, nx, ny));
    return kv * ((U[at(i, j, k, nx, ny)] - U[at(i, j, k - 1, nx, ny)]) * idz +
                 (W[at(i, j, k, nx, ny)] - W[at(im, j, k, nx, ny)]) * idx);
  };
  auto sigma_yz = [&](int i, int j, int k) {  // at (x_{i+1/2}, y_j, z_k), 0 < k < nz
    const int jm = j > 0 ? j - 1 : ny - 1;
    const double kv = kavg4(at(i, jm, k - 1, nx, ny), at(i, j, k - 1, nx, ny), at(i, jm, k, nx, ny),
                            at(i, j, k, nx, ny));
    return kv * ((V[at(i, j, k, nx, ny)] - V[at(i, j, k - 1, nx, ny)]) * idz +
                 (W[at(i, j, k, nx, ny)] - W[at(i, jm, k, nx, ny)]) * idy);
  };
  auto slip_u = [&](int i, int j) {
    return (1.0 - lw.frac) * U[at(i, j, lw.k0, nx, ny)] + lw.frac * U[at(i, j, lw.k1, nx, ny)];
  };
  auto slip_v = [&](int i, int j) {
    return (1.0 - lw.frac) * V[at(i, j, lw.k0, nx, ny)] + lw.frac * V[at(i, j, lw.k1, nx, ny)];
  };

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const int jp = j + 1 < ny ? j + 1 : 0;
      const int jm = j > 0 ? j - 1 : ny - 1;
      for (int i = 0; i < nx; ++i) {
        const int ip = i + 1 < nx ? i + 1 : 0;
        const int im = i > 0 ? i - 1 : nx - 1;
        const std::size_t n = at(i, j, k, nx, ny);
        const bool has_top = k + 1 < nz;
        const bool has_bot = k > 0;

        // ---- u at (x_i, y_{j+1/2}, z_{k+1/2})
        {
          const double uc_e = 0.5 * (U[n] + U[at(ip, j, k, nx, ny)]);
          const double uc_w = 0.5 * (U[at(im, j, k, nx, ny)] + U[n]);
          const double vt_n = 0.5 * (V[at(im, jp, k, nx, ny)] + V[at(i, jp, k, nx, ny)]);
          const double vt_s = 0.5 * (V[at(im, j, k, nx, ny)] + V[n]);
          const double ut_n = 0.5 * (U[n] + U[at(i, jp, k, nx, ny)]);
          const double ut_s = 0.5 * (U[at(i, jm, k, nx, ny)] + U[n]);
          double wt_t = 0.0, wt_b = 0.0, ut_t = 0.0, ut_b = 0.0;
          if (has_top) {
            wt_t = 0.5 * (W[at(im, j, k + 1, nx, ny)] + W[at(i, j, k + 1, nx, ny)]);
            ut_t = 0.5 * (U[n] + U[n + plane]);
          }
          if (has_bot) {
            wt_b = 0.5 * (W[at(im, j, k, nx, ny)] + W[n]);
            ut_b = 0.5 * (U[n - plane] + U[n]);
          }
          const double div_t = (uc_e - uc_w) * idx + (vt_n - vt_s) * idy + (wt_t - wt_b) * idz;
          const double adv = (uc_e * uc_e - uc_w * uc_w) * idx + (vt_n * ut_n - vt_s * ut_s) * idy +
                             (wt_t * ut_t - wt_b * ut_b) * idz - 0.5 * U[n] * div_t;

          const double sxx_e = 2.0 * K[n] * (U[at(ip, j, k, nx, ny)] - U[n]) * idx;
          const double sxx_w = 2.0 * K[at(im, j, k, nx, ny)] * (U[n] - U[at(im, j, k, nx, ny)]) * idx;
          const double sxy_n = sigma_xy(i, jp, k);
          const double sxy_s = sigma_xy(i, j, k);
          const double sxz_t = has_top ? sigma_xz(i, j, k + 1) : 0.0;
          const double sxz_b = has_bot ? sigma_xz(i, j, k) : traction_scale * slip_u(i, j);
          const double visc = (sxx_e - sxx_w) * idx + (sxy_n - sxy_s) * idy + (sxz_t - sxz_b) * idz;

          const double v_at_u = 0.25 * (V[at(im, j, k, nx, ny)] + V[n] + V[at(im, jp, k, nx, ny)] +
                                        V[at(i, jp, k, nx, ny)]);
          out.u.data()[n] =
              -adv + visc + mf_u[k] + prm.coriolis * (v_at_u - prm.vg) + prm.body_force_x;
        }

        // ---- v at (x_{i+1/2}, y_j, z_{k+1/2})
        {
          const double ut_e = 0.5 * (U[at(ip, jm, k, nx, ny)] + U[at(ip, j, k, nx, ny)]);
          const double ut_w = 0.5 * (U[at(i, jm, k, nx, ny)] + U[n]);
          const double vt_e = 0.5 * (V[n] + V[at(ip, j, k, nx, ny)]);
          const double vt_w = 0.5 * (V[at(im, j, k, nx, ny)] + V[n]);
          const double vc_n = 0.5 * (V[n] + V[at(i, jp, k, nx, ny)]);
          const double vc_s = 0.5 * (V[at(i, jm, k, nx, ny)] + V[n]);
          double wt_t = 0.0, wt_b = 0.0, vt_t = 0.0, vt_b = 0.0;
          if (has_top) {
            wt_t = 0.5 * (W[at(i, jm, k + 1, nx, ny)] + W[at(i, j, k + 1, nx, ny)]);
            vt_t = 0.5 * (V[n] + V[n + plane]);
          }
          if (has_bot) {
            wt_b = 0.5 * (W[at(i, jm, k, nx, ny)] + W[n]);
            vt_b = 0.5 * (V[n - plane] + V[n]);
          }
          const double div_t = (ut_e - ut_w) * idx + (vc_n - vc_s) * idy + (wt_t - wt_b) * idz;
          const double adv = (ut_e * vt_e - ut_w * vt_w) * idx + (vc_n * vc_n - vc_s * vc_s) * idy +
                             (wt_t * vt_t - wt_b * vt_b) * idz - 0.5 * V[n] * div_t;

          const double syy_n = 2.0 * K[n] * (V[at(i, jp, k, nx, ny)] - V[n]) * idy;
          const double syy_s = 2.0 * K[at(i, jm, k, nx, ny)] * (V[n] - V[at(i, jm, k, nx, ny)]) * idy;
          const double sxy_e = sigma_xy(ip, j, k);
          const double sxy_w = sigma_xy(i, j, k);
          const double syz_t = has_top ? sigma_yz(i, j, k + 1) : 0.0;
          const double syz_b = has_bot ? sigma_yz(i, j, k) : traction_scale * slip_v(i, j);
          const double visc = (sxy_e - sxy_w) * idx + (syy_n - syy_s) * idy + (syz_t - syz_b) * idz;

          const double u_at_v = 0.25 * (U[at(i, jm, k, nx, ny)] + U[at(ip, jm, k, nx, ny)] + U[n] +
                                        U[at(ip, j, k, nx, ny)]);
          out.v.data()[n] = -adv + visc + mf_v[k] - prm.coriolis * (u_at_v - prm.ug);
        }

        // ---- w at (x_{i+1/2}, y_{j+1/2}, z_k), interior faces only
        if (has_bot) {
          const double ut_e = 0.5 * (U[at(ip, j, k - 1, nx, ny)] + U[at(ip, j, k, nx, ny)]);
          const double ut_w = 0.5 * (U[at(i, j, k - 1, nx, ny)] + U[n]);
          const double wt_e = 0.5 * (W[n] + W[at(ip, j, k, nx, ny)]);
          const double wt_w = 0.5 * (W[at(im, j, k, nx, ny)] + W[n]);
          const double vt_n = 0.5 * (V[at(i, jp, k - 1, nx, ny)] + V[at(i, jp, k, nx, ny)]);
          const double vt_s = 0.5 * (V[at(i, j, k - 1, nx, ny)] + V[n]);
          const double wt_n = 0.5 * (W[n] + W[at(i, jp, k, nx, ny)]);
          const double wt_s = 0.5 * (W[at(i, jm, k, nx, ny)] + W[n]);
          const double wc_t = 0.5 * (W[n] + W[n + plane]);
          const double wc_b = 0.5 * (W[n - plane] + W[n]);
          const double div_t = (ut_e - ut_w) * idx + (vt_n - vt_s) * idy + (wc_t - wc_b) * idz;
          const double adv = (ut_e * wt_e - ut_w * wt_w) * idx + (vt_n * wt_n - vt_s * wt_s) * idy +
                             (wc_t * wc_t - wc_b * wc_b) * idz - 0.5 * W[n] * div_t;

          const double szz_t = 2.0 * K[n] * (W[n + plane] - W[n]) * idz;
          const double szz_b = 2.0 * K[n - plane] * (W[n] - W[n - plane]) * idz;
          const double sxz_e = sigma_xz(ip, j, k);
          const double sxz_w = sigma_xz(i, j, k);
          const double syz_n = sigma_yz(i, jp, k);
          const double syz_s = sigma_yz(i, j, k);
          const double visc = (sxz_e - sxz_w) * idx + (syz_n - syz_s) * idy + (szz_t - szz_b) * idz;

          double buoy = 0.0;
          if (prm.energy) {
            const double th = 0.5 * (T[n - plane] + T[n]) - 0.5 * (mt[k - 1] + mt[k]);
            buoy = prm.gravity * th / prm.theta0;
          }
          out.w.data()[n] = -adv + visc + buoy;
        }
      }
    }
  }
  // Boundary faces carry no w tendency.
  std::fill(out.w.data(), out.w.data() + plane, 0.0);
  std::fill(out.w.data() + nz * plane, out.w.data() + (nz + 1) * plane, 0.0);
}

MomentumTendency momentum_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                              const WallState& wall, const PhysicsParams& params,
                              double sampling_height) {
  MomentumTendency out;
  momentum_rhs(grid, state, sgs, wall, params, out, sampling_height);
  return out;
}

void energy_rhs(const Grid& g, const FlowState& s, const SgsState& sgs, const WallState& wall,
                const PhysicsParams& prm, double prandtl, ScalarField& out) {
  if (!out.same_shape(s.theta)) out = ScalarField(g, Staggering::Center);
  if (!prm.energy) {
    out.fill(0.0);
    return;
  }
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;
  const double* U = s.u.data();
  const double* V = s.v.data();
  const double* W = s.w.data();
  const double* T = s.theta.data();
  const double* nut = sgs.nu_t.data();

  std::vector<double> K(g.cell_count());
  for (int k = 0; k < nz; ++k) {
    const double gk = sgs.gamma[k] / prandtl;
    for (std::size_t n = k * plane; n < (k + 1) * plane; ++n) K[n] = prm.alpha_mol + gk * nut[n];
  }

  // Mean-field diffusion of <theta>; bottom and top fluxes enter through the cell stencils.
  const Profile mt = plane_average(s.theta);
  std::vector<double> mf(nz, 0.0);
  {
    std::vector<double> f(nz + 1, 0.0);
    for (int k = 1; k < nz; ++k)
      f[k] = 0.5 * (sgs.nu_T[k - 1] + sgs.nu_T[k]) / prandtl * (mt[k] - mt[k - 1]) * idz;
    for (int k = 0; k < nz; ++k) mf[k] = (f[k + 1] - f[k]) * idz;
  }
  // Down-gradient fluxes (K dtheta/dz) imposed on the boundary faces.
  const double g_bottom = -wall.heat_flux;

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    const double g_top = (k + 1 == nz) ? prm.top_theta_gradient : 0.0;
    for (int j = 0; j < ny; ++j) {
      const int jp = j + 1 < ny ? j + 1 : 0;
      const int jm = j > 0 ? j - 1 : ny - 1;
      for (int i = 0; i < nx; ++i) {
        const int ip = i + 1 < nx ? i + 1 : 0;
        const int im = i > 0 ? i - 1 : nx - 1;
        const std::size_t n = at(i, j, k, nx, ny);
        const std::size_t ne = at(ip, j, k, nx, ny), nw = at(im, j, k, nx, ny);
        const std::size_t nn = at(i, jp, k, nx, ny), ns = at(i, jm, k, nx, ny);
        const double tc = T[n];

        double adv = (U[ne] * 0.5 * (tc + T[ne]) - U[n] * 0.5 * (T[nw] + tc)) * idx +
                     (V[nn] * 0.5 * (tc + T[nn]) - V[n] * 0.5 * (T[ns] + tc)) * idy;
        const double fz_t = k + 1 < nz ? W[n + plane] * 0.5 * (tc + T[n + plane]) : 0.0;
        const double fz_b = k > 0 ? W[n] * 0.5 * (T[n - plane] + tc) : 0.0;
        adv += (fz_t - fz_b) * idz;

        const double gx_e = 0.5 * (K[n] + K[ne]) * (T[ne] - tc) * idx;
        const double gx_w = 0.5 * (K[nw] + K[n]) * (tc - T[nw]) * idx;
        const double gy_n = 0.5 * (K[n] + K[nn]) * (T[nn] - tc) * idy;
        const double gy_s = 0.5 * (K[ns] + K[n]) * (tc - T[ns]) * idy;
        double gz_t, gz_b;
        if (k + 1 < nz)
          gz_t = 0.5 * (K[n] + K[n + plane]) * (T[n + plane] - tc) * idz;
        else
          gz_t = (K[n] + sgs.nu_T[k] / prandtl) * g_top;
        if (k > 0)
          gz_b = 0.5 * (K[n - plane] + K[n]) * (tc - T[n - plane]) * idz;
        else
          gz_b = g_bottom;

        out.data()[n] = -adv + (gx_e - gx_w) * idx + (gy_n - gy_s) * idy + (gz_t - gz_b) * idz + mf[k];
      }
    }
  }
}

ScalarField energy_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                       const WallState& wall, const PhysicsParams& params, double prandtl) {
  ScalarField out(grid, Staggering::Center);
  energy_rhs(grid, state, sgs, wall, params, prandtl, out);
  return out;
}

Solver::Solver(const Grid& grid, SolverConfig config)
    : grid_(grid), config_(std::move(config)), poisson_(grid) {
  config_.stepper.validate();
  config_.sgs.validate();
  sampling_height_ = config_.sampling_height.value_or(grid_.z_center(0));
  if (sampling_height_ < grid_.z_center(0) - 1e-12 * grid_.dz ||
      sampling_height_ > grid_.z_center(grid_.nz - 1))
    throw ConfigError("wall.sampling_height_over_z0",
                      "sampling height must lie between the first and last cell levels");
  config_.similarity.z1 = sampling_height_;
  config_.similarity.gravity = config_.physics.gravity;
  config_.similarity.theta0 = config_.physics.theta0;
  config_.similarity.validate();
  for (auto& a : accum_) a = ScalarField(grid_, Staggering::Center);
  accum_[0] = ScalarField(grid_, Staggering::XFace);
  accum_[1] = ScalarField(grid_, Staggering::YFace);
  accum_[2] = ScalarField(grid_, Staggering::ZFace);
}

void Solver::evaluate(const FlowState& state) {
  const Profile mu = plane_average(state.u);
  const Profile mv = plane_average(state.v);
  const Profile mt = plane_average(state.theta);
  const double z = sampling_height_;
  wall_ = evaluate_wall(interpolate_levels(grid_, mu, z), interpolate_levels(grid_, mv, z),
                        interpolate_levels(grid_, mt, z),
                        config_.physics.surface.at(state.time), config_.similarity,
                        config_.physics.energy);

  std::optional<double> zi;
  if (config_.sgs.mfev_upper_cutoff) {
    // Same depth definition as the bulk diagnostics; without a jet, search from the wall.
    const Profile z = grid_.heights(Staggering::Center);
    Profile speed(grid_.nz);
    for (int k = 0; k < grid_.nz; ++k) speed[k] = std::hypot(mu[k], mv[k]);
    const HeightEstimate jet = llj_height(z, speed);
    const HeightEstimate depth =
        boundary_layer_depth(z, speed, jet.valid ? jet.z : grid_.z_bottom, grid_.lz);
    if (depth.valid) zi = depth.z;
  }
  update_sgs(grid_, {state.u, state.v, state.w}, state.theta, state.e, wall_, config_.sgs,
             config_.similarity, sgs_, zi);
}

StepLimits Solver::limits(const FlowState& s) const {
  const Grid& g = grid_;
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  double smax = 0.0;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t n = at(i, j, k, nx, ny);
        const double cu = std::max(std::abs(s.u.data()[n]), std::abs(s.u.data()[at(g.wrap_x(i + 1), j, k, nx, ny)]));
        const double cv = std::max(std::abs(s.v.data()[n]), std::abs(s.v.data()[at(i, g.wrap_y(j + 1), k, nx, ny)]));
        const double cw = std::max(std::abs(s.w.data()[n]), std::abs(s.w.data()[n + plane]));
        smax = std::max(smax, cu / g.dx + cv / g.dy + cw / g.dz);
      }

  const PhysicsParams& p = config_.physics;
  const double pr = config_.sgs.prandtl;
  double kmax = std::max(p.nu_mol, p.alpha_mol);
  const double tke_factor = config_.sgs.uses_tke() ? 2.0 : 1.0;
  const double fluct_factor = std::max({1.0, tke_factor, 1.0 / pr});
  for (int k = 0; k < nz; ++k) {
    double nut_max = 0.0;
    for (double x : sgs_.nu_t.level(k)) nut_max = std::max(nut_max, x);
    const double fluct = sgs_.gamma[k] * nut_max * fluct_factor;
    const double mean = sgs_.nu_T[k] * std::max(1.0, 1.0 / pr);
    kmax = std::max(kmax, std::max(p.nu_mol, p.alpha_mol) + fluct + mean);
  }

  StepLimits lim;
  lim.max_speed_sum = smax;
  lim.advective = smax > 0.0 ? config_.stepper.cfl_target / smax : config_.stepper.dt_max;
  const double inv_h2 = 1.0 / (g.dx * g.dx) + 1.0 / (g.dy * g.dy) + 1.0 / (g.dz * g.dz);
  lim.diffusive = kmax > 0.0 ? config_.stepper.diff_number_target / (kmax * inv_h2)
                             : config_.stepper.dt_max;
  return lim;
}

void Solver::step(FlowState& state, double dt) {
  evaluate(state);
  const StepLimits lim = limits(state);
  const double limit = lim.dt();
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
    throw CflViolation("time step " + std::to_string(dt) + " s exceeds stability limit " +
                           std::to_string(limit) + " s",
                       dt, limit);
  last_cfl_ = dt * lim.max_speed_sum;
  run_stages(state, dt);
}

double Solver::advance(FlowState& state, double max_dt) {
  evaluate(state);
  const StepLimits lim = limits(state);
  const double stable = std::min(lim.dt(), config_.stepper.dt_max);
  if (stable < config_.stepper.dt_min)
    throw CflViolation("stable time step " + std::to_string(stable) + " s below dt_min", stable,
                       config_.stepper.dt_min);
  const double dt = std::min(stable, max_dt);
  last_cfl_ = dt * lim.max_speed_sum;
  run_stages(state, dt);
  return dt;
}

void Solver::project(ScalarField& u, ScalarField& v, ScalarField& w) {
  divergence(grid_, {u, v, w}, div_);
  remove_domain_mean(div_);
  poisson_.solve(div_, phi_);
  subtract_gradient(grid_, phi_, u, v, w);
}

void Solver::run_stages(FlowState& state, double dt) {
  const double t0 = state.time;
  const bool tke = config_.sgs.uses_tke();
  const TkeParams tke_params{config_.sgs.prandtl, config_.physics.nu_mol,
                             {config_.physics.gravity, config_.physics.theta0}};
  std::array<ScalarField*, 5> fields{&state.u, &state.v, &state.w, &state.theta, &state.e};
  std::array<ScalarField*, 5> tends{&tend_.u, &tend_.v, &tend_.w, &tend_theta_, &tend_e_};

  for (int stage = 0; stage < 3; ++stage) {
    if (stage > 0) {
      state.time = t0 + kRkTime[stage] * dt;
      evaluate(state);
    }
    momentum_rhs(grid_, state, sgs_, wall_, config_.physics, tend_, sampling_height_);
    energy_rhs(grid_, state, sgs_, wall_, config_.physics, config_.sgs.prandtl, tend_theta_);
    if (tke)
      tke_rhs(grid_, state.e, {state.u, state.v, state.w}, sgs_.split.fluct, sgs_.gamma, sgs_.nu_t,
              state.theta, sgs_.length, tke_params, tend_e_);

    const double a = kRkAlpha[stage], b = kRkBeta[stage];
    const int nfields = tke ? 5 : 4;
    for (int f = 0; f < nfields; ++f) {
      double* q = accum_[f].data();
      double* x = fields[f]->data();
      const double* r = tends[f]->data();
      const std::size_t n = accum_[f].size();
      for (std::size_t m = 0; m < n; ++m) {
        q[m] = a * q[m] + dt * r[m];
        x[m] += b * q[m];
      }
    }

    divergence(grid_, {state.u, state.v, state.w}, div_);
    remove_domain_mean(div_);
    poisson_.solve(div_, phi_);
    subtract_gradient(grid_, phi_, state.u, state.v, state.w);
    // Keep the stored increments consistent with the projected velocity.
    for (double& x : phi_.values()) x /= b;
    subtract_gradient(grid_, phi_, accum_[0], accum_[1], accum_[2]);

    if (tke) {
      for (double& x : state.e.values())
        if (x < 0.0) {
          x = 0.0;
          ++clip_events_;
        }
    }
  }
  state.time = t0 + dt;
  ++state.step;
}

}  // namespace abl

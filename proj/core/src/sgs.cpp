#include "abl/sgs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "abl/errors.hpp"

namespace abl {
namespace {

const ScalarField& component(const StrainTensorField& s, int c) {
  switch (c) {
    case 0: return s.xx;
    case 1: return s.yy;
    case 2: return s.zz;
    case 3: return s.xy;
    case 4: return s.xz;
    default: return s.yz;
  }
}

ScalarField& component(StrainTensorField& s, int c) {
  return const_cast<ScalarField&>(component(static_cast<const StrainTensorField&>(s), c));
}

// Off-diagonal components appear twice in S_ij S_ij.
constexpr std::array<double, 6> kWeight{1.0, 1.0, 1.0, 2.0, 2.0, 2.0};

void ensure(ScalarField& f, const Grid& g, Staggering s) {
  if (f.levels() != g.levels(s) || f.nx() != g.nx || f.ny() != g.ny || f.staggering() != s)
    f = ScalarField(g, s);
}

inline double column_ddz(const double* col, std::size_t stride, int k, int nz, double dz) {
  if (nz == 1) return 0.0;
  if (nz == 2) return (col[stride] - col[0]) / dz;
  const auto s = static_cast<std::ptrdiff_t>(stride);
  const double* c = col + k * s;
  if (k == 0) return (-3.0 * c[0] + 4.0 * c[s] - c[2 * s]) / (2.0 * dz);
  if (k == nz - 1) return (3.0 * c[0] - 4.0 * c[-s] + c[-2 * s]) / (2.0 * dz);
  return (c[s] - c[-s]) / (2.0 * dz);
}

}  // namespace

std::string_view to_string(SgsModel m) {
  switch (m) {
    case SgsModel::MfevSmg: return "MFEV_SMG";
    case SgsModel::MfevTkeSmg: return "MFEV_TKE_SMG";
    case SgsModel::MfevTkeDrd: return "MFEV_TKE_DRD";
    case SgsModel::GlobalSmg: return "GLOBAL_SMG";
  }
  return "?";
}

std::optional<SgsModel> parse_sgs_model(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  for (SgsModel m : {SgsModel::MfevSmg, SgsModel::MfevTkeSmg, SgsModel::MfevTkeDrd, SgsModel::GlobalSmg})
    if (to_string(m) == upper) return m;
  return std::nullopt;
}

double SgsConfig::smagorinsky_constant() const { return std::sqrt(ck * std::sqrt(ck / ceps)); }

void SgsConfig::validate() const {
  if (!(ck > 0.0)) throw ConfigError("sgs.ck", "must be positive");
  if (!(ceps > 0.0)) throw ConfigError("sgs.ceps", "must be positive");
  if (!(cs_global > 0.0)) throw ConfigError("sgs.cs_global", "must be positive");
  if (!(prandtl > 0.0)) throw ConfigError("sgs.prandtl", "must be positive");
  if (mfev_upper_cutoff && !(*mfev_upper_cutoff > 0.0))
    throw ConfigError("sgs.mfev_upper_cutoff", "must be positive when set");
}

double isotropy_factor(double fluct_invariant, double mean_invariant) {
  const double sum = fluct_invariant + mean_invariant;
  return sum > 0.0 ? fluct_invariant / sum : 0.0;
}

void strain_split(const Grid& g, const StrainTensorField& s, StrainSplit& out) {
  if (!out.fluct.xx.same_shape(s.xx)) out.fluct = StrainTensorField(g);
  const int nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double inv = 1.0 / static_cast<double>(plane);
  for (auto& m : out.mean) m.assign(nz, 0.0);
  out.mean_invariant.assign(nz, 0.0);
  out.fluct_invariant.assign(nz, 0.0);
  out.gamma.assign(nz, 0.0);

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    double mean_sq = 0.0;
    double fluct_sq = 0.0;
    for (int c = 0; c < 6; ++c) {
      const double* src = component(s, c).data() + k * plane;
      double* dst = component(out.fluct, c).data() + k * plane;
      double sum = 0.0;
      for (std::size_t n = 0; n < plane; ++n) sum += src[n];
      const double mean = sum * inv;
      double sq = 0.0;
      for (std::size_t n = 0; n < plane; ++n) {
        dst[n] = src[n] - mean;
        sq += dst[n] * dst[n];
      }
      out.mean[c][k] = mean;
      mean_sq += kWeight[c] * mean * mean;
      fluct_sq += kWeight[c] * sq * inv;
    }
    out.mean_invariant[k] = std::sqrt(2.0 * mean_sq);
    out.fluct_invariant[k] = std::sqrt(2.0 * fluct_sq);
    out.gamma[k] = isotropy_factor(out.fluct_invariant[k], out.mean_invariant[k]);
  }
}

StrainSplit strain_split(const Grid& grid, const StrainTensorField& s) {
  StrainSplit out;
  strain_split(grid, s, out);
  return out;
}

MfevProfile mfev_profile(const Profile& mean_invariant, double u_tau, double phi_m,
                         const SimilarityConstants& c) {
  MfevProfile out;
  out.nu_T.assign(mean_invariant.size(), 0.0);
  if (!(u_tau > 0.0)) return out;
  out.nu_T_star = u_tau * c.kappa * c.z1 / phi_m;
  const double scale = out.nu_T_star * c.kappa * c.z1 / (u_tau * phi_m);
  for (std::size_t k = 0; k < mean_invariant.size(); ++k) out.nu_T[k] = scale * mean_invariant[k];
  return out;
}

void smagorinsky_nut(const StrainTensorField& s, double delta, double cs, ScalarField& out) {
  if (!out.same_shape(s.xx)) out = ScalarField(s.xx);
  const double coef = (cs * delta) * (cs * delta);
  const std::size_t n_total = s.xx.size();
  double* dst = out.data();
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < n_total; ++n) dst[n] = coef * std::sqrt(2.0 * s.contraction(n));
}

ScalarField smagorinsky_nut(const StrainTensorField& s, double delta, double cs) {
  ScalarField out(s.xx);
  smagorinsky_nut(s, delta, cs, out);
  return out;
}

void tke_length_scale(const Grid& g, const ScalarField& e, const ScalarField& theta,
                      LengthScaleMode mode, const BuoyancyParams& b, ScalarField& out) {
  ensure(out, g, Staggering::Center);
  if (mode == LengthScaleMode::Smagorinsky) {
    out.fill(g.delta);
    return;
  }
  const Profile dthdz = vertical_derivative(plane_average(theta), g.dz);
  const std::size_t plane = g.plane_size();
  for (int k = 0; k < g.nz; ++k) {
    const double n2 = b.gravity / b.theta0 * dthdz[k];
    const double* ek = e.data() + k * plane;
    double* lk = out.data() + k * plane;
    if (!(n2 > 0.0)) {
      std::fill(lk, lk + plane, g.delta);
      continue;
    }
    const double inv_n = 1.0 / std::sqrt(n2);
    for (std::size_t n = 0; n < plane; ++n)
      lk[n] = std::min(g.delta, 0.76 * std::sqrt(std::max(ek[n], 0.0)) * inv_n);
  }
}

ScalarField tke_length_scale(const Grid& g, const ScalarField& e, const ScalarField& theta,
                             LengthScaleMode mode, const BuoyancyParams& b) {
  ScalarField out(g, Staggering::Center);
  tke_length_scale(g, e, theta, mode, b, out);
  return out;
}

void tke_nut(const ScalarField& e, const ScalarField& length, double ck, ScalarField& out) {
  if (!out.same_shape(e)) out = ScalarField(e);
  const std::size_t n_total = e.size();
  for (std::size_t n = 0; n < n_total; ++n)
    out.data()[n] = ck * length.data()[n] * std::sqrt(std::max(e.data()[n], 0.0));
}

ScalarField tke_nut(const ScalarField& e, const ScalarField& length, double ck) {
  ScalarField out(e);
  tke_nut(e, length, ck, out);
  return out;
}

void tke_rhs(const Grid& g, const ScalarField& e, VelocityRef vel, const StrainTensorField& fluct,
             const Profile& gamma, const ScalarField& nu_t, const ScalarField& theta,
             const ScalarField& length, const TkeParams& p, ScalarField& out) {
  ensure(out, g, Staggering::Center);
  const int nx = g.nx, ny = g.ny, nz = g.nz;
  const std::size_t plane = g.plane_size();
  const double idx = 1.0 / g.dx, idy = 1.0 / g.dy, idz = 1.0 / g.dz;
  const double buoy = p.buoyancy.gravity / p.buoyancy.theta0;
  const double* ep = e.data();
  const double* u = vel.u.data();
  const double* v = vel.v.data();
  const double* w = vel.w.data();
  const double* nt = nu_t.data();
  const double* th = theta.data();
  const Profile dthdz_mean = vertical_derivative(plane_average(theta), g.dz);

  auto kdiff = [&](std::size_t n, int k) { return p.nu_mol + 2.0 * gamma[k] * nt[n]; };

#pragma omp parallel for schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const int jp = j + 1 < ny ? j + 1 : 0;
      const int jm = j > 0 ? j - 1 : ny - 1;
      const std::size_t row = (static_cast<std::size_t>(k) * ny + j) * nx;
      const std::size_t rowp = (static_cast<std::size_t>(k) * ny + jp) * nx;
      const std::size_t rowm = (static_cast<std::size_t>(k) * ny + jm) * nx;
      for (int i = 0; i < nx; ++i) {
        const int ip = i + 1 < nx ? i + 1 : 0;
        const int im = i > 0 ? i - 1 : nx - 1;
        const std::size_t n = row + i;
        const double ec = ep[n];
        const double kc = kdiff(n, k);

        // Advection, flux form.
        const double fxe = u[row + ip] * 0.5 * (ec + ep[row + ip]);
        const double fxw = u[n] * 0.5 * (ep[row + im] + ec);
        const double fyn = v[rowp + i] * 0.5 * (ec + ep[rowp + i]);
        const double fys = v[n] * 0.5 * (ep[rowm + i] + ec);
        const double fzt = k + 1 < nz ? w[n + plane] * 0.5 * (ec + ep[n + plane]) : 0.0;
        const double fzb = k > 0 ? w[n] * 0.5 * (ep[n - plane] + ec) : 0.0;
        const double adv = (fxe - fxw) * idx + (fyn - fys) * idy + (fzt - fzb) * idz;

        // Diffusion with face-averaged coefficients.
        const double dxe = 0.5 * (kc + kdiff(row + ip, k)) * (ep[row + ip] - ec) * idx;
        const double dxw = 0.5 * (kc + kdiff(row + im, k)) * (ec - ep[row + im]) * idx;
        const double dyn = 0.5 * (kc + kdiff(rowp + i, k)) * (ep[rowp + i] - ec) * idy;
        const double dys = 0.5 * (kc + kdiff(rowm + i, k)) * (ec - ep[rowm + i]) * idy;
        const double dzt =
            k + 1 < nz ? 0.5 * (kc + kdiff(n + plane, k + 1)) * (ep[n + plane] - ec) * idz : 0.0;
        const double dzb = k > 0 ? 0.5 * (kc + kdiff(n - plane, k - 1)) * (ec - ep[n - plane]) * idz : 0.0;
        const double diff = (dxe - dxw) * idx + (dyn - dys) * idy + (dzt - dzb) * idz;

        const double production = 2.0 * gamma[k] * nt[n] * fluct.contraction(n);

        const double dthdz = column_ddz(th + (n - k * plane), plane, k, nz, g.dz);
        const double tau_theta_z = -(gamma[k] * nt[n] / p.prandtl) * (dthdz - dthdz_mean[k]);
        const double buoyancy = buoy * tau_theta_z;

        const double len = length.data()[n];
        const double e_pos = std::max(ec, 0.0);
        const double dissipation =
            len > 0.0 ? dissipation_coefficient(len, g.delta) * e_pos * std::sqrt(e_pos) / len : 0.0;

        out.data()[n] = -adv + production + buoyancy - dissipation + diff;
      }
    }
  }
}

ScalarField tke_rhs(const Grid& g, const ScalarField& e, VelocityRef vel,
                    const StrainTensorField& fluct, const Profile& gamma, const ScalarField& nu_t,
                    const ScalarField& theta, const ScalarField& length, const TkeParams& p) {
  ScalarField out(g, Staggering::Center);
  tke_rhs(g, e, vel, fluct, gamma, nu_t, theta, length, p, out);
  return out;
}

SgsFluxes sgs_fluxes(const Grid& g, const StrainTensorField& s, const std::array<Profile, 6>& s_mean,
                     const Profile& nu_T, const ScalarField& nu_t, const Profile& gamma,
                     const ScalarField& theta, double prandtl) {
  SgsFluxes out;
  for (auto& f : out.tau) f = ScalarField(g, Staggering::Center);
  for (auto& f : out.tau_theta) f = ScalarField(g, Staggering::Center);
  const std::size_t plane = g.plane_size();
  const Profile dthdz_mean = vertical_derivative(plane_average(theta), g.dz);

  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t n = theta.index(i, j, k);
        const double fluct_visc = gamma[k] * nu_t.data()[n];
        for (int c = 0; c < 6; ++c)
          out.tau[c].data()[n] =
              -2.0 * nu_T[k] * s_mean[c][k] - 2.0 * fluct_visc * component(s, c).data()[n];

        const double dthdx =
            (theta(g.wrap_x(i + 1), j, k) - theta(g.wrap_x(i - 1), j, k)) / (2.0 * g.dx);
        const double dthdy =
            (theta(i, g.wrap_y(j + 1), k) - theta(i, g.wrap_y(j - 1), k)) / (2.0 * g.dy);
        const double dthdz = column_ddz(theta.data() + (n - k * plane), plane, k, g.nz, g.dz);
        out.tau_theta[0].data()[n] = -(fluct_visc / prandtl) * dthdx;
        out.tau_theta[1].data()[n] = -(fluct_visc / prandtl) * dthdy;
        out.tau_theta[2].data()[n] =
            -(nu_T[k] / prandtl) * dthdz_mean[k] - (fluct_visc / prandtl) * dthdz;
      }
  return out;
}

void update_sgs(const Grid& g, VelocityRef vel, const ScalarField& theta, const ScalarField& e,
                const WallState& wall, const SgsConfig& cfg, const SimilarityConstants& c,
                SgsState& out, std::optional<double> boundary_layer_depth) {
  strain_rate(g, vel, out.strain);
  strain_split(g, out.strain, out.split);
  ensure(out.nu_t, g, Staggering::Center);
  ensure(out.length, g, Staggering::Center);

  const BuoyancyParams buoy{c.gravity, c.theta0};
  switch (cfg.model) {
    case SgsModel::GlobalSmg:
      out.nu_T.assign(g.nz, 0.0);
      out.nu_T_star = 0.0;
      out.gamma.assign(g.nz, 1.0);
      out.length.fill(g.delta);
      smagorinsky_nut(out.strain, g.delta, cfg.cs_global, out.nu_t);
      return;
    case SgsModel::MfevSmg:
      out.length.fill(g.delta);
      smagorinsky_nut(out.split.fluct, g.delta, cfg.smagorinsky_constant(), out.nu_t);
      break;
    case SgsModel::MfevTkeSmg:
    case SgsModel::MfevTkeDrd:
      tke_length_scale(g, e, theta,
                       cfg.model == SgsModel::MfevTkeDrd ? LengthScaleMode::Deardorff
                                                         : LengthScaleMode::Smagorinsky,
                       buoy, out.length);
      tke_nut(e, out.length, cfg.ck, out.nu_t);
      break;
  }

  MfevProfile mfev = mfev_profile(out.split.mean_invariant, wall.u_tau, wall.phi_m, c);
  out.nu_T = std::move(mfev.nu_T);
  out.nu_T_star = mfev.nu_T_star;
  out.gamma = out.split.gamma;

  if (cfg.mfev_upper_cutoff && boundary_layer_depth) {
    const double z_cut = *cfg.mfev_upper_cutoff * *boundary_layer_depth;
    for (int k = 0; k < g.nz; ++k)
      if (g.z_center(k) > z_cut) {
        out.gamma[k] = 1.0;
        out.nu_T[k] = 0.0;
      }
  }
}

}  // namespace abl

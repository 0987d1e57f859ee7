#include "abl/diagnostics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "abl/operators.hpp"

namespace abl {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;

// Velocities interpolated to cell centers.
struct CenteredVelocity {
  ScalarField u, v, w;
};

CenteredVelocity center_velocity(const Grid& g, const FlowState& s) {
  CenteredVelocity c{ScalarField(g, Staggering::Center), ScalarField(g, Staggering::Center),
                     ScalarField(g, Staggering::Center)};
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        c.u(i, j, k) = 0.5 * (s.u(i, j, k) + s.u(g.wrap_x(i + 1), j, k));
        c.v(i, j, k) = 0.5 * (s.v(i, j, k) + s.v(i, g.wrap_y(j + 1), k));
        c.w(i, j, k) = 0.5 * (s.w(i, j, k) + s.w(i, j, k + 1));
      }
  return c;
}

// Plane mean of (a - <a>)(b - <b>) per level.
Profile covariance(const ScalarField& a, const Profile& ma, const ScalarField& b,
                   const Profile& mb) {
  const int nz = a.levels();
  Profile out(nz, 0.0);
  for (int k = 0; k < nz; ++k) {
    const auto la = a.level(k);
    const auto lb = b.level(k);
    double sum = 0.0;
    for (std::size_t n = 0; n < la.size(); ++n) sum += (la[n] - ma[k]) * (lb[n] - mb[k]);
    out[k] = sum / static_cast<double>(la.size());
  }
  return out;
}

void resize_all(ProfileSet& p, int nz) {
  for (Profile* c : p.columns()) c->assign(nz, 0.0);
}

}  // namespace

const std::vector<std::string>& ProfileSet::column_names() {
  static const std::vector<std::string> names{
      "z",      "u",      "v",      "theta",  "speed",        "direction", "uu",   "vv",
      "ww",     "uw",     "vw",     "uv",     "wt",           "ut",        "vt",   "sgs_uw",
      "sgs_vw", "sgs_uv", "sgs_wt", "sgs_ut", "sgs_vt",       "tke_resolved", "tke_sgs",
      "nu_T",   "nu_t",   "gamma",  "N2",     "S2",           "Ri"};
  return names;
}

std::vector<const Profile*> ProfileSet::columns() const {
  return {&z,      &u,      &v,      &theta,  &speed,  &direction,    &uu,      &vv,
          &ww,     &uw,     &vw,     &uv,     &wt,     &ut,           &vt,      &sgs_uw,
          &sgs_vw, &sgs_uv, &sgs_wt, &sgs_ut, &sgs_vt, &tke_resolved, &tke_sgs, &nu_T,
          &nu_t,   &gamma,  &n2,     &s2,     &ri};
}

std::vector<Profile*> ProfileSet::columns() {
  std::vector<Profile*> out;
  for (const Profile* p : std::as_const(*this).columns()) out.push_back(const_cast<Profile*>(p));
  return out;
}

StabilityProfiles stability_profiles(const Profile& u, const Profile& v, const Profile& theta,
                                     double dz, double gravity, double theta0) {
  const Profile du = vertical_derivative(u, dz);
  const Profile dv = vertical_derivative(v, dz);
  const Profile dt = vertical_derivative(theta, dz);
  StabilityProfiles s;
  const std::size_t n = u.size();
  s.n2.resize(n);
  s.s2.resize(n);
  s.ri.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    s.n2[k] = gravity / theta0 * dt[k];
    s.s2[k] = du[k] * du[k] + dv[k] * dv[k];
    s.ri[k] = s.s2[k] < 1e-12 ? kNaN : s.n2[k] / s.s2[k];
  }
  return s;
}

ProfileSet snapshot_profiles(const Grid& g, const FlowState& s, const SgsState& sgs,
                             const StatisticsParams& p) {
  ProfileSet out;
  resize_all(out, g.nz);
  out.z = g.heights(Staggering::Center);

  const CenteredVelocity c = center_velocity(g, s);
  out.u = plane_average(c.u);
  out.v = plane_average(c.v);
  const Profile mw = plane_average(c.w);
  out.theta = plane_average(s.theta);

  out.uu = covariance(c.u, out.u, c.u, out.u);
  out.vv = covariance(c.v, out.v, c.v, out.v);
  out.ww = covariance(c.w, mw, c.w, mw);
  out.uw = covariance(c.u, out.u, c.w, mw);
  out.vw = covariance(c.v, out.v, c.w, mw);
  out.uv = covariance(c.u, out.u, c.v, out.v);
  out.wt = covariance(c.w, mw, s.theta, out.theta);
  out.ut = covariance(c.u, out.u, s.theta, out.theta);
  out.vt = covariance(c.v, out.v, s.theta, out.theta);

  const SgsFluxes f = sgs_fluxes(g, sgs.strain, sgs.split.mean, sgs.nu_T, sgs.nu_t, sgs.gamma,
                                 s.theta, p.prandtl);
  out.sgs_uw = plane_average(f.tau[4]);
  out.sgs_vw = plane_average(f.tau[5]);
  out.sgs_uv = plane_average(f.tau[3]);
  out.sgs_ut = plane_average(f.tau_theta[0]);
  out.sgs_vt = plane_average(f.tau_theta[1]);
  out.sgs_wt = plane_average(f.tau_theta[2]);

  if (p.tke_model) {
    out.tke_sgs = plane_average(s.e);
  } else {
    ScalarField q(g, Staggering::Center);
    for (std::size_t n = 0; n < q.size(); ++n) {
      const double r = sgs.nu_t.data()[n] / (p.ck * g.delta);
      q.data()[n] = r * r;
    }
    out.tke_sgs = plane_average(q);
  }
  out.nu_T = sgs.nu_T;
  out.nu_t = plane_average(sgs.nu_t);
  out.gamma = sgs.gamma;

  finalize_derived(out, g.dz, p);
  return out;
}

void finalize_derived(ProfileSet& set, double dz, const StatisticsParams& p) {
  const int nz = set.levels();
  for (int k = 0; k < nz; ++k) {
    set.speed[k] = std::hypot(set.u[k], set.v[k]);
    set.direction[k] = std::atan2(set.v[k], set.u[k]) * 180.0 / kPi;
    set.tke_resolved[k] = 0.5 * (set.uu[k] + set.vv[k] + set.ww[k]);
  }
  StabilityProfiles st = stability_profiles(set.u, set.v, set.theta, dz, p.gravity, p.theta0);
  set.n2 = std::move(st.n2);
  set.s2 = std::move(st.s2);
  set.ri = std::move(st.ri);
}

void ProfileAccumulator::add(const ProfileSet& snap) {
  if (samples_ == 0) {
    mean_ = snap;
    samples_ = 1;
    return;
  }
  ++samples_;
  const double w = 1.0 / static_cast<double>(samples_);
  auto dst = mean_.columns();
  auto src = snap.columns();
  for (std::size_t c = 0; c < dst.size(); ++c) {
    Profile& m = *dst[c];
    const Profile& x = *src[c];
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += (x[k] - m[k]) * w;
  }
}

void ProfileAccumulator::reset() {
  mean_ = ProfileSet{};
  samples_ = 0;
}

ProfileSet ProfileAccumulator::result(double dz, const StatisticsParams& p) const {
  ProfileSet r = mean_;
  if (samples_ > 0) finalize_derived(r, dz, p);
  return r;
}

void ProfileAccumulator::restore(const ProfileSet& mean, std::size_t samples) {
  mean_ = mean;
  samples_ = samples;
}

HeightEstimate boundary_layer_depth(const Profile& z, const Profile& speed, double above,
                                    double top, double eps) {
  const int n = static_cast<int>(z.size());
  // Gradient between levels m and m+1, located midway.
  std::vector<double> grad(n > 1 ? n - 1 : 0), zg(grad.size());
  for (int m = 0; m + 1 < n; ++m) {
    grad[m] = std::abs(speed[m + 1] - speed[m]) / (z[m + 1] - z[m]);
    zg[m] = 0.5 * (z[m] + z[m + 1]);
  }
  const int ng = static_cast<int>(grad.size());
  for (int m = 0; m + 2 < ng; ++m) {
    if (zg[m] <= above) continue;
    if (grad[m] < eps && grad[m + 1] < eps && grad[m + 2] < eps) {
      if (m == 0 || grad[m - 1] < eps) return {zg[m], true};
      // Interpolate the crossing of eps between the two gradient samples.
      const double g0 = grad[m - 1], g1 = grad[m];
      const double f = (g0 - eps) / (g0 - g1);
      return {zg[m - 1] + f * (zg[m] - zg[m - 1]), true};
    }
  }
  return {top, false};
}

HeightEstimate llj_height(const Profile& z, const Profile& speed) {
  const int n = static_cast<int>(z.size());
  if (n == 0) return {0.0, false};
  const int k = static_cast<int>(std::max_element(speed.begin(), speed.end()) - speed.begin());
  if (k == 0 || k == n - 1) return {z[k], false};
  const double fm = speed[k - 1], f0 = speed[k], fp = speed[k + 1];
  const double curv = fm - 2.0 * f0 + fp;
  const double h = 0.5 * (z[k + 1] - z[k - 1]);
  const double shift = curv != 0.0 ? 0.5 * (fm - fp) / curv : 0.0;
  return {z[k] + shift * h, true};
}

double obukhov_from_surface(double u_tau, double q_star, double kappa, double gravity,
                            double theta0) {
  if (q_star == 0.0) return std::numeric_limits<double>::infinity();
  return -u_tau * u_tau * u_tau / (kappa * (gravity / theta0) * q_star);
}

BulkQuantities bulk_quantities(const ProfileSet& mean, double u_tau, double q_star, double kappa,
                               double gravity, double theta0, double top, double eps) {
  BulkQuantities b;
  b.u_tau = u_tau;
  b.q_star = q_star;
  const HeightEstimate zj = llj_height(mean.z, mean.speed);
  b.z_j = zj.z;
  b.z_j_valid = zj.valid;
  const HeightEstimate zi = boundary_layer_depth(mean.z, mean.speed, b.z_j, top, eps);
  b.z_i = zi.z;
  b.z_i_converged = zi.valid;
  b.l_mo = obukhov_from_surface(u_tau, q_star, kappa, gravity, theta0);
  b.z_i_over_l_mo = std::isfinite(b.l_mo) ? b.z_i / b.l_mo : 0.0;
  b.z_j_over_z_i = b.z_i > 0.0 ? b.z_j / b.z_i : 0.0;
  return b;
}

double mean_richardson(const ProfileSet& p, double z_lo, double z_hi) {
  double sum = 0.0;
  int count = 0;
  for (int k = 0; k < p.levels(); ++k)
    if (p.z[k] >= z_lo && p.z[k] <= z_hi && std::isfinite(p.ri[k])) {
      sum += p.ri[k];
      ++count;
    }
  return count > 0 ? sum / count : kNaN;
}

ShearProfile similarity_shear(const Profile& z, const Profile& u, double u_tau, double kappa) {
  if (z.size() != u.size()) throw std::invalid_argument("similarity_shear: size mismatch");
  if (!(u_tau > 0.0)) throw std::invalid_argument("similarity_shear: u_tau must be positive");
  ShearProfile out;
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    if (!(z[k] > 0.0 && z[k + 1] > z[k]))
      throw std::invalid_argument("similarity_shear: heights must be positive and increasing");
    const double dlnz = std::log(z[k + 1] / z[k]);
    out.z.push_back(std::sqrt(z[k] * z[k + 1]));
    out.phi.push_back(kappa / u_tau * (u[k + 1] - u[k]) / dlnz);
  }
  return out;
}

Spectrum horizontal_spectrum(const std::vector<double>& plane, int nx, int ny) {
  if (nx != ny) throw std::invalid_argument("horizontal_spectrum: plane must be square");
  if (plane.size() != static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("horizontal_spectrum: plane size mismatch");
  const std::size_t n = plane.size();
  fftw_complex* buf = fftw_alloc_complex(n);
  for (std::size_t m = 0; m < n; ++m) {
    buf[m][0] = plane[m];
    buf[m][1] = 0.0;
  }
  fftw_plan plan = fftw_plan_dft_2d(ny, nx, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  const int nbins = static_cast<int>(std::lround(std::sqrt(2.0) * (nx / 2))) + 1;
  Spectrum s;
  s.energy.assign(nbins, 0.0);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (int j = 0; j < ny; ++j) {
    const int ky = j <= ny / 2 ? j : j - ny;
    for (int i = 0; i < nx; ++i) {
      const int kx = i <= nx / 2 ? i : i - nx;
      const auto& c = buf[static_cast<std::size_t>(j) * nx + i];
      const double e = 0.5 * (c[0] * c[0] + c[1] * c[1]) * norm;
      const int bin = static_cast<int>(std::lround(std::sqrt(double(kx * kx + ky * ky))));
      s.energy[bin] += e;
    }
  }
  fftw_free(buf);
  return s;
}

VelocitySpectra velocity_spectra(const Grid& g, const FlowState& s, double z) {
  const CenteredVelocity c = center_velocity(g, s);
  const double pos = std::clamp((z - g.z_center(0)) / g.dz, 0.0, double(g.nz - 1));
  const int k0 = std::min(static_cast<int>(std::floor(pos)), g.nz - 1);
  const int k1 = std::min(k0 + 1, g.nz - 1);
  const double f = pos - k0;
  const std::size_t plane = g.plane_size();
  std::vector<double> pu(plane), pv(plane);
  for (std::size_t n = 0; n < plane; ++n) {
    pu[n] = (1.0 - f) * c.u.level(k0)[n] + f * c.u.level(k1)[n];
    pv[n] = (1.0 - f) * c.v.level(k0)[n] + f * c.v.level(k1)[n];
  }
  VelocitySpectra out;
  out.height = z;
  out.u = horizontal_spectrum(pu, g.nx, g.ny);
  out.v = horizontal_spectrum(pv, g.nx, g.ny);
  return out;
}

}  // namespace abl

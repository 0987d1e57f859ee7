#include "abl/cases.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "abl/errors.hpp"
#include "abl/operators.hpp"
#include "abl/poisson.hpp"

namespace abl {
namespace {

// Uniform double in [-1, 1) from the top 53 bits; independent of the
// library's distribution implementation.
double symmetric_unit(std::mt19937_64& rng) {
  const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u01 - 1.0;
}

double gabls_theta(double z) { return z <= 100.0 ? 265.0 : 265.0 + 0.01 * (z - 100.0); }

double initial_tke(const TkeInit& t, double z) {
  if (z >= t.depth) return t.floor;
  const double s = 1.0 - z / t.depth;
  return std::max(t.floor, t.amplitude * s * s * s);
}

}  // namespace

std::string to_string(CaseKind kind) { return kind == CaseKind::Gabls1 ? "gabls1" : "neutral"; }

CaseKind parse_case_kind(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "gabls1" || s == "gabls") return CaseKind::Gabls1;
  if (s == "neutral") return CaseKind::Neutral;
  throw ConfigError("case.name", "unknown case '" + name + "' (expected gabls1 or neutral)");
}

CaseConfig CaseConfig::gabls1() {
  CaseConfig c;
  c.kind = CaseKind::Gabls1;
  c.output.spectra_heights = {100.0};
  return c;
}

CaseConfig CaseConfig::neutral() {
  CaseConfig c;
  c.kind = CaseKind::Neutral;
  c.nx = 48;
  c.ny = 48;
  c.nz = 32;
  c.lz = 1000.0;
  c.lx = c.ly = 3.0 * c.lz;
  c.physics.coriolis = 0.0;
  c.physics.energy = false;
  c.physics.surface.cooling_per_hour = 0.0;
  c.sgs.model = SgsModel::MfevSmg;
  c.duration_hours = 6.0;
  c.output.spectra_heights = {100.0};
  return c;
}

void CaseConfig::validate() const {
  if (nx < 1) throw ConfigError("grid.nx", "must be >= 1");
  if (ny < 1) throw ConfigError("grid.ny", "must be >= 1");
  if (nz < 1) throw ConfigError("grid.nz", "must be >= 1");
  if (!(lx > 0.0)) throw ConfigError("grid.lx", "must be positive");
  if (!(ly > 0.0)) throw ConfigError("grid.ly", "must be positive");
  if (!(z1_plus > 0.0)) throw ConfigError("wall.z1_plus", "must be positive");
  if (!(similarity.z0 > 0.0)) throw ConfigError("wall.z0", "must be positive");
  if (!(lz > z1_plus * similarity.z0))
    throw ConfigError("grid.lz", "must exceed the bottom face height z1_plus * z0");
  if (!(duration_hours > 0.0)) throw ConfigError("case.duration_hours", "must be positive");
  if (!(physics.theta0 > 0.0)) throw ConfigError("physics.theta0", "must be positive");
  if (!(physics.gravity >= 0.0)) throw ConfigError("physics.gravity", "must be non-negative");
  if (physics.nu_mol < 0.0) throw ConfigError("physics.nu_mol", "must be non-negative");
  if (physics.alpha_mol < 0.0) throw ConfigError("physics.alpha_mol", "must be non-negative");
  if (kind == CaseKind::Neutral && !(neutral_u_tau > 0.0))
    throw ConfigError("case.neutral_u_tau", "must be positive");
  if (!(output.profile_interval > 0.0))
    throw ConfigError("output.profile_interval", "must be positive");
  if (!(output.timeseries_interval > 0.0))
    throw ConfigError("output.timeseries_interval", "must be positive");
  if (!(output.checkpoint_interval > 0.0))
    throw ConfigError("output.checkpoint_interval", "must be positive");
  if (output.dir.empty()) throw ConfigError("output.dir", "must not be empty");
  if (stats_start() < 0.0 || stats_end() <= stats_start())
    throw ConfigError("output.stats_start_hours", "statistics window must be non-empty");
  if (!(tke_init.depth > 0.0)) throw ConfigError("sgs.e_init_depth", "must be positive");
  if (tke_init.amplitude < 0.0 || tke_init.floor < 0.0)
    throw ConfigError("sgs.e_init_amplitude", "must be non-negative");
  for (const auto& s : output.slices)
    if (s.axis != 'x' && s.axis != 'y' && s.axis != 'z')
      throw ConfigError("output.slices", "axis must be x, y or z");
  sgs.validate();
  stepper.validate();
  SimilarityConstants c = similarity;
  c.z1 = z1_plus * c.z0;
  c.validate();
  // Builds the solver geometry, which checks the sampling height.
  const Grid g = grid();
  if (sampling_height_over_z0) {
    const double zs = *sampling_height_over_z0 * similarity.z0;
    if (zs < g.z_center(0) - 1e-12 * g.dz || zs > g.z_center(g.nz - 1))
      throw ConfigError("wall.sampling_height_over_z0",
                        "sampling height must lie between the first and last cell levels");
  }
}

Grid CaseConfig::grid() const { return Grid::make(nx, ny, nz, lx, ly, lz, z1_plus * similarity.z0); }

SolverConfig CaseConfig::solver_config() const {
  SolverConfig s;
  s.physics = physics;
  s.sgs = sgs;
  s.similarity = similarity;
  s.stepper = stepper;
  if (sampling_height_over_z0) s.sampling_height = *sampling_height_over_z0 * similarity.z0;
  if (kind == CaseKind::Neutral) {
    // Channel-style drive balancing the target wall stress over the column.
    const double depth = lz - z1_plus * similarity.z0;
    s.physics.body_force_x = neutral_u_tau * neutral_u_tau / depth;
    s.physics.energy = false;
  }
  return s;
}

double CaseConfig::stats_start() const {
  if (output.stats_start) return *output.stats_start;
  const double t = duration_seconds();
  return kind == CaseKind::Gabls1 ? std::max(0.0, t - 3600.0) : 0.5 * t;
}

double CaseConfig::stats_end() const { return output.stats_end.value_or(duration_seconds()); }

FlowState init_gabls(const CaseConfig& config, std::mt19937_64& rng) {
  const Grid g = config.grid();
  FlowState s(g, 0.0);
  s.u.fill(config.physics.ug);
  s.v.fill(config.physics.vg);
  for (int k = 0; k < g.nz; ++k) {
    const double z = g.z_center(k);
    const double th = gabls_theta(z);
    const double e = initial_tke(config.tke_init, z);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        double t = th;
        if (z <= 50.0) t += 0.1 * symmetric_unit(rng);
        s.theta(i, j, k) = t;
        s.e(i, j, k) = e;
      }
  }
  return s;
}

FlowState init_gabls(const CaseConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_gabls(config, rng);
}

FlowState init_neutral(const CaseConfig& config, std::mt19937_64& rng) {
  const Grid g = config.grid();
  FlowState s(g, config.physics.theta0);
  const double kappa = config.similarity.kappa;
  const double z0 = config.similarity.z0;
  const double ut = config.neutral_u_tau;
  for (int k = 0; k < g.nz; ++k) {
    const double z = g.z_center(k);
    const double ubar = log_law_velocity(z, ut, kappa, z0);
    const double amp = z < 200.0 ? 0.1 * ubar : 0.0;
    const double e = initial_tke(config.tke_init, z);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        s.u(i, j, k) = ubar + amp * symmetric_unit(rng);
        s.v(i, j, k) = amp * symmetric_unit(rng);
        s.e(i, j, k) = e;
      }
  }
  for (int k = 1; k < g.nz; ++k) {
    const double z = g.z_face(k);
    if (z >= 200.0) break;
    const double amp = 0.1 * log_law_velocity(z, ut, kappa, z0);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) s.w(i, j, k) = amp * symmetric_unit(rng);
  }
  PoissonSolver poisson(g);
  ScalarField div = divergence(g, {s.u, s.v, s.w});
  remove_domain_mean(div);
  const ScalarField phi = poisson.solve(div);
  subtract_gradient(g, phi, s.u, s.v, s.w);
  return s;
}

FlowState init_neutral(const CaseConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return init_neutral(config, rng);
}

FlowState initialize(const CaseConfig& config, std::mt19937_64& rng) {
  return config.kind == CaseKind::Gabls1 ? init_gabls(config, rng) : init_neutral(config, rng);
}

double surface_temperature(double time_s) { return SurfaceTemperatureRule{}.at(time_s); }

double log_law_velocity(double z, double u_tau, double kappa, double z0) {
  return u_tau / kappa * std::log((z + z0) / z0);
}

}  // namespace abl

#include "abl/wall_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abl/errors.hpp"

namespace abl {

void SimilarityConstants::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("wall.kappa", "must be positive");
  if (!(z0 > 0.0)) throw ConfigError("wall.z0", "must be positive");
  if (!(z1 > z0)) throw ConfigError("wall.z1", "reference height must exceed z0");
  if (!(beta_m > 0.0)) throw ConfigError("wall.beta_m", "must be positive");
  if (!(beta_h >= beta_m)) throw ConfigError("wall.beta_h", "must be >= beta_m");
  if (!(gravity > 0.0)) throw ConfigError("physics.gravity", "must be positive");
  if (!(theta0 > 0.0)) throw ConfigError("physics.theta0", "must be positive");
}

double SimilarityConstants::log_ratio() const { return std::log(z1 / z0); }

double bulk_richardson(double slip_speed, double delta_theta, const SimilarityConstants& c) {
  return c.gravity * c.z1 * delta_theta / (slip_speed * slip_speed);
}

FrictionScales solve_friction_scales(double slip_speed, double delta_theta,
                                     const SimilarityConstants& c) {
  const double lg = c.log_ratio();
  const double ku = c.kappa * slip_speed;
  if (delta_theta == 0.0) return {ku / lg, 0.0};

  const double ri = bulk_richardson(slip_speed, delta_theta, c);

  if (c.beta_h == c.beta_m) {
    const double factor = 1.0 - c.beta_m * ri;
    if (!(factor > 0.0))
      throw NoStableSolution("wall model: no positive friction velocity at Ri_b = " +
                             std::to_string(ri));
    return {ku / lg * factor, c.kappa * delta_theta / lg * factor};
  }

  const double r = c.beta_h / c.beta_m;
  const double disc = 1.0 + 4.0 * ri * (c.beta_h - c.beta_m);
  if (disc < 0.0)
    throw NoStableSolution("wall model: negative discriminant at Ri_b = " + std::to_string(ri));
  const double sq = std::sqrt(disc);

  // Negative-sign root of the quadratic, rationalised so that the
  // subtraction (2r - 1 - sqrt(disc)) never cancels:
  //   u2 = kU/ln * (2r-1 - sqrt(disc)) / (2(r-1)) = kU/ln * 2(r - beta_m Ri) / (2r-1 + sqrt(disc))
  const double u_tau = ku / lg * 2.0 * (r - c.beta_m * ri) / (2.0 * r - 1.0 + sq);
  if (!(u_tau > 0.0))
    throw NoStableSolution("wall model: selected root u_tau <= 0 at Ri_b = " + std::to_string(ri));

  // theta_tau = u (kU - u ln) / (beta_m k g z1), with kU - u ln = kU * 2 beta_m Ri / (1 + sqrt(disc)).
  const double slack = ku * 2.0 * c.beta_m * ri / (1.0 + sq);
  const double theta_tau = u_tau * slack / (c.beta_m * c.kappa * c.gravity * c.z1);
  return {u_tau, std::max(theta_tau, 0.0)};
}

StabilityFunctions stability_functions(double z_over_l, const SimilarityConstants& c) {
  const double zeta = std::max(z_over_l, 0.0);
  return {1.0 + c.beta_m * zeta, 1.0 + c.beta_h * zeta};
}

double obukhov_length(const FrictionScales& s, const SimilarityConstants& c) {
  if (s.theta_tau <= 0.0) return std::numeric_limits<double>::infinity();
  return s.u_tau * s.u_tau / (c.kappa * c.gravity * s.theta_tau);
}

double surface_heat_flux(double u_tau, double theta_tau, double theta0) {
  return -u_tau * theta_tau * theta0;
}

Traction localize_traction(std::span<const double> u_t, std::span<const double> v_t,
                           double u_tau, double slip_speed) {
  Traction t{std::vector<double>(u_t.size()), std::vector<double>(v_t.size())};
  const double scale = slip_speed > 0.0 ? u_tau * u_tau / slip_speed : 0.0;
  std::transform(u_t.begin(), u_t.end(), t.x.begin(), [scale](double u) { return scale * u; });
  std::transform(v_t.begin(), v_t.end(), t.y.begin(), [scale](double v) { return scale * v; });
  return t;
}

WallState evaluate_wall(double mean_u, double mean_v, double theta_sample, double theta_surface,
                        const SimilarityConstants& c, bool thermal) {
  WallState s;
  s.slip_u = mean_u;
  s.slip_v = mean_v;
  s.slip_speed = std::hypot(mean_u, mean_v);
  s.theta_sample = theta_sample;
  s.theta_surface = theta_surface;
  s.delta_theta = thermal ? std::max(theta_sample - theta_surface, 0.0) / c.theta0 : 0.0;
  s.obukhov_length = std::numeric_limits<double>::infinity();
  if (!(s.slip_speed > 0.0)) return s;

  s.bulk_richardson = bulk_richardson(s.slip_speed, s.delta_theta, c);
  const FrictionScales fs = solve_friction_scales(s.slip_speed, s.delta_theta, c);
  s.u_tau = fs.u_tau;
  s.theta_tau = fs.theta_tau;
  s.obukhov_length = obukhov_length(fs, c);
  const StabilityFunctions phi = stability_functions(c.z1 / s.obukhov_length, c);
  s.phi_m = phi.phi_m;
  s.phi_h = phi.phi_h;
  s.heat_flux = surface_heat_flux(s.u_tau, s.theta_tau, c.theta0);
  return s;
}

}  // namespace abl

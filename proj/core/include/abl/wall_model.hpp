#pragma once

#include <span>
#include <vector>

namespace abl {

/// Monin-Obukhov surface-layer constants.
///
/// `z1` is the reference height of the similarity laws: the height at which
/// the slip velocity and temperature are sampled.
struct SimilarityConstants {
  double kappa = 0.4;
  double beta_m = 4.8;
  double beta_h = 7.2;
  double z0 = 0.1;
  double z1 = 1.0;
  double gravity = 9.81;
  double theta0 = 263.5;

  /// Throws ConfigError unless kappa > 0, z1 > z0 > 0 and beta_h >= beta_m > 0.
  void validate() const;
  double log_ratio() const;
};

/// Friction velocity (m/s) and dimensionless temperature scale theta_tau / theta0.
struct FrictionScales {
  double u_tau = 0.0;
  double theta_tau = 0.0;
};

struct StabilityFunctions {
  double phi_m = 1.0;
  double phi_h = 1.0;
};

/// Plane-averaged wall state for one evaluation of the wall model.
struct WallState {
  double slip_u = 0.0;          ///< <u> at the sampling height (m/s)
  double slip_v = 0.0;          ///< <v> at the sampling height (m/s)
  double slip_speed = 0.0;      ///< U = |<u_t>| (m/s)
  double theta_sample = 0.0;    ///< <theta> at the sampling height (K)
  double theta_surface = 0.0;   ///< surface temperature (K)
  double delta_theta = 0.0;     ///< |<theta> - theta_s| / theta0, zero when unstable
  double bulk_richardson = 0.0;
  double u_tau = 0.0;
  double theta_tau = 0.0;       ///< dimensionless
  double obukhov_length = 0.0;  ///< +inf when neutral
  double phi_m = 1.0;
  double phi_h = 1.0;
  double heat_flux = 0.0;       ///< Q* (K m/s), negative when the surface cools the air
};

/// Bulk Richardson number g z1 dtheta / U^2.
double bulk_richardson(double slip_speed, double delta_theta, const SimilarityConstants& c);

/// Closed-form root of the coupled log-law system for (u_tau, theta_tau).
///
/// Selects the smaller root, the only one with theta_tau >= 0. Throws
/// NoStableSolution when the discriminant is negative or the root is not
/// positive (bulk Richardson number at or beyond beta_h / beta_m^2).
FrictionScales solve_friction_scales(double slip_speed, double delta_theta,
                                     const SimilarityConstants& c);

/// Stable-branch linear stability functions; z/L < 0 is clamped to neutral.
StabilityFunctions stability_functions(double z_over_l, const SimilarityConstants& c);

/// L = u_tau^2 theta0 / (kappa g theta_tau) with dimensionless theta_tau. +inf if theta_tau == 0.
double obukhov_length(const FrictionScales& s, const SimilarityConstants& c);

/// Q* = -u_tau theta_tau theta0.
double surface_heat_flux(double u_tau, double theta_tau, double theta0);

struct Traction {
  std::vector<double> x;
  std::vector<double> y;
};

/// Local wall stress from the plane-averaged friction velocity: u_tau^2 * u_t / U.
Traction localize_traction(std::span<const double> u_t, std::span<const double> v_t,
                           double u_tau, double slip_speed);

/// Full wall-model evaluation from plane means at the sampling height.
///
/// A zero slip speed gives u_tau = 0. A negative temperature difference
/// (unstable) is treated as neutral.
WallState evaluate_wall(double mean_u, double mean_v, double theta_sample, double theta_surface,
                        const SimilarityConstants& c, bool thermal = true);

}  // namespace abl

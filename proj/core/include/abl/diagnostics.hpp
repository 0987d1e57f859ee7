#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "abl/dynamics.hpp"
#include "abl/grid.hpp"
#include "abl/sgs.hpp"

namespace abl {

/// Plane statistics per cell level. Fluctuations are taken against the
/// instantaneous plane mean, velocities interpolated to cell centers.
struct ProfileSet {
  Profile z;
  Profile u, v, theta, speed, direction;
  Profile uu, vv, ww, uw, vw, uv;
  Profile wt, ut, vt;
  Profile sgs_uw, sgs_vw, sgs_uv;
  Profile sgs_wt, sgs_ut, sgs_vt;
  Profile tke_resolved, tke_sgs;
  Profile nu_T, nu_t, gamma;
  Profile n2, s2, ri;

  int levels() const { return static_cast<int>(z.size()); }

  /// CSV column names, in the order of columns().
  static const std::vector<std::string>& column_names();
  std::vector<const Profile*> columns() const;
  std::vector<Profile*> columns();
};

struct StabilityProfiles {
  Profile n2, s2, ri;
};

/// N^2 = (g/theta0) d<theta>/dz, S^2 = (d<u>/dz)^2 + (d<v>/dz)^2, Ri = N^2/S^2
/// (NaN where S^2 < 1e-12).
StabilityProfiles stability_profiles(const Profile& u, const Profile& v, const Profile& theta,
                                     double dz, double gravity, double theta0);

struct StatisticsParams {
  double gravity = 9.81;
  double theta0 = 263.5;
  double prandtl = 1.0;
  double ck = 0.1;
  bool tke_model = false;
};

/// Instantaneous plane statistics of `state` with its evaluated closure.
ProfileSet snapshot_profiles(const Grid& grid, const FlowState& state, const SgsState& sgs,
                             const StatisticsParams& p);

/// Fills speed, direction, tke_resolved and the stability columns from the
/// averaged means and variances.
void finalize_derived(ProfileSet& set, double dz, const StatisticsParams& p);

/// Uniformly weighted running mean of snapshots.
class ProfileAccumulator {
 public:
  void add(const ProfileSet& snapshot);
  std::size_t samples() const { return samples_; }
  void reset();
  /// Time average with derived columns recomputed from the averages.
  ProfileSet result(double dz, const StatisticsParams& p) const;

  const ProfileSet& mean() const { return mean_; }
  void restore(const ProfileSet& mean, std::size_t samples);

 private:
  ProfileSet mean_;
  std::size_t samples_ = 0;
};

/// Running mean of a scalar time series.
class ScalarMean {
 public:
  void add(double x) {
    ++n_;
    mean_ += (x - mean_) / static_cast<double>(n_);
  }
  double value() const { return mean_; }
  std::size_t count() const { return n_; }
  void restore(double mean, std::size_t n) {
    mean_ = mean;
    n_ = n;
  }

 private:
  double mean_ = 0.0;
  std::size_t n_ = 0;
};

struct HeightEstimate {
  double z = 0.0;
  bool valid = true;  ///< false: not converged (z_i) or degenerate maximum (z_j)
};

/// Lowest height above `above` where |dU/dz| stays below eps for three
/// consecutive level pairs; returns (top, false) if none qualifies.
HeightEstimate boundary_layer_depth(const Profile& z, const Profile& speed, double above,
                                    double top, double eps = 0.002);

/// Height of the maximum of `speed`, refined by a three-point parabola.
HeightEstimate llj_height(const Profile& z, const Profile& speed);

/// L_MO = -u_tau^3 / (kappa (g/theta0) Q*); +infinity when Q* = 0.
double obukhov_from_surface(double u_tau, double q_star, double kappa, double gravity,
                            double theta0);

struct BulkQuantities {
  double u_tau = 0.0;
  double q_star = 0.0;
  double z_i = 0.0;
  bool z_i_converged = false;
  double l_mo = 0.0;
  double z_i_over_l_mo = 0.0;
  double z_j = 0.0;
  bool z_j_valid = false;
  double z_j_over_z_i = 0.0;
};

BulkQuantities bulk_quantities(const ProfileSet& mean, double u_tau, double q_star,
                               double kappa, double gravity, double theta0, double top,
                               double eps = 0.002);

/// Mean of the finite Ri values with z_lo <= z <= z_hi; NaN if none.
double mean_richardson(const ProfileSet& p, double z_lo, double z_hi);

/// Nondimensional shear phi = (kappa / u_tau) dU/d(ln z) between adjacent
/// levels, located at their geometric-mean height. Exact for profiles
/// quadratic in ln z, so a log law gives phi = 1 at any spacing.
struct ShearProfile {
  Profile z;
  Profile phi;
};
ShearProfile similarity_shear(const Profile& z, const Profile& u, double u_tau, double kappa);

struct Spectrum {
  std::vector<double> energy;  ///< energy per integer wavenumber bin
};

/// Ring-binned 2-D spectrum of an nx-by-nx plane (row-major, x fastest).
/// Bin m collects |u_hat(k)|^2 / 2 for round(|k|) = m, with u_hat normalized
/// so that the bins sum to mean(u^2) / 2.
Spectrum horizontal_spectrum(const std::vector<double>& plane, int nx, int ny);

struct VelocitySpectra {
  double height = 0.0;
  Spectrum u, v;
};

/// Spectra of u and v at absolute height z (cell-centered, linear in z).
VelocitySpectra velocity_spectra(const Grid& grid, const FlowState& state, double z);

}  // namespace abl

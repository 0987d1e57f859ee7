#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "abl/grid.hpp"
#include "abl/operators.hpp"
#include "abl/wall_model.hpp"

namespace abl {

/// Subgrid closures. The MFEV variants split the stress into a mean-field
/// part acting on plane-averaged shear and a fluctuating eddy-viscosity part.
enum class SgsModel { MfevSmg, MfevTkeSmg, MfevTkeDrd, GlobalSmg };

std::string_view to_string(SgsModel m);
/// Accepts MFEV_SMG, MFEV_TKE_SMG, MFEV_TKE_DRD, GLOBAL_SMG (case-insensitive).
std::optional<SgsModel> parse_sgs_model(std::string_view name);

enum class LengthScaleMode { Smagorinsky, Deardorff };

struct SgsConfig {
  SgsModel model = SgsModel::MfevSmg;
  double ck = 0.1;
  double ceps = 0.93;
  double cs_global = 0.135;
  double prandtl = 1.0;
  /// Fraction of the boundary-layer depth above which gamma = 1 and nu_T = 0.
  std::optional<double> mfev_upper_cutoff;

  /// C_s = (C_k sqrt(C_k / C_eps))^(1/2).
  double smagorinsky_constant() const;
  bool uses_tke() const { return model == SgsModel::MfevTkeSmg || model == SgsModel::MfevTkeDrd; }
  bool uses_mfev() const { return model != SgsModel::GlobalSmg; }
  void validate() const;
};

/// Plane-mean / fluctuation decomposition of the strain tensor.
struct StrainSplit {
  std::array<Profile, 6> mean;  ///< <S_ij> per level, order xx yy zz xy xz yz
  StrainTensorField fluct;      ///< S'_ij = S_ij - <S_ij>
  Profile mean_invariant;       ///< <S>  = sqrt(2 <S_ij><S_ij>)
  Profile fluct_invariant;      ///< S'   = sqrt(2 <S'_ij S'_ij>)
  Profile gamma;                ///< S' / (S' + <S>), zero where both vanish
};

StrainSplit strain_split(const Grid& grid, const StrainTensorField& s);
void strain_split(const Grid& grid, const StrainTensorField& s, StrainSplit& out);

double isotropy_factor(double fluct_invariant, double mean_invariant);

struct MfevProfile {
  double nu_T_star = 0.0;
  Profile nu_T;
};

/// nu_T* = u_tau kappa z1 / phi_m and nu_T(z) = nu_T* kappa z1 / (u_tau phi_m) <S>(z).
MfevProfile mfev_profile(const Profile& mean_invariant, double u_tau, double phi_m,
                         const SimilarityConstants& c);

/// nu_t = (C_s Delta)^2 sqrt(2 S_ij S_ij) evaluated pointwise on `s`.
void smagorinsky_nut(const StrainTensorField& s, double delta, double cs, ScalarField& out);
ScalarField smagorinsky_nut(const StrainTensorField& s, double delta, double cs);

/// C_eps = 0.19 + 0.74 L / Delta.
inline double dissipation_coefficient(double length, double delta) {
  return 0.19 + 0.74 * length / delta;
}

struct BuoyancyParams {
  double gravity = 9.81;
  double theta0 = 263.5;
};

/// SGS length scale. Deardorff: min(Delta, 0.76 sqrt(e) / N) with
/// N^2 = (g / theta0) d<theta>/dz, falling back to Delta where N^2 <= 0.
void tke_length_scale(const Grid& grid, const ScalarField& e, const ScalarField& theta,
                      LengthScaleMode mode, const BuoyancyParams& b, ScalarField& out);
ScalarField tke_length_scale(const Grid& grid, const ScalarField& e, const ScalarField& theta,
                             LengthScaleMode mode, const BuoyancyParams& b);

/// nu_t = C_k L sqrt(e).
void tke_nut(const ScalarField& e, const ScalarField& length, double ck, ScalarField& out);
ScalarField tke_nut(const ScalarField& e, const ScalarField& length, double ck);

struct TkeParams {
  double prandtl = 1.0;
  double nu_mol = 0.0;
  BuoyancyParams buoyancy;
};

/// Right-hand side of the SGS TKE equation: advection, shear production
/// 2 gamma nu_t S'_ij S'_ij, buoyancy (g/theta0) tau_theta_z, dissipation
/// C_eps e^{3/2} / L and diffusion with (nu_mol + 2 gamma nu_t). Zero-flux
/// bottom and top.
void tke_rhs(const Grid& grid, const ScalarField& e, VelocityRef vel, const StrainTensorField& fluct,
             const Profile& gamma, const ScalarField& nu_t, const ScalarField& theta,
             const ScalarField& length, const TkeParams& p, ScalarField& out);
ScalarField tke_rhs(const Grid& grid, const ScalarField& e, VelocityRef vel,
                    const StrainTensorField& fluct, const Profile& gamma, const ScalarField& nu_t,
                    const ScalarField& theta, const ScalarField& length, const TkeParams& p);

/// Cell-centered SGS stresses and temperature fluxes.
struct SgsFluxes {
  std::array<ScalarField, 6> tau;        ///< xx yy zz xy xz yz
  std::array<ScalarField, 3> tau_theta;  ///< x y z
};

/// tau_ij = -2 nu_T <S_ij> - 2 gamma nu_t S_ij and
/// tau_theta_j = -(nu_T/Pr_t) d<theta>/dz delta_jz - (gamma nu_t/Pr_t) dtheta/dx_j.
SgsFluxes sgs_fluxes(const Grid& grid, const StrainTensorField& s, const std::array<Profile, 6>& s_mean,
                     const Profile& nu_T, const ScalarField& nu_t, const Profile& gamma,
                     const ScalarField& theta, double prandtl);

/// Everything the dynamics and diagnostics need from the closure at one instant.
struct SgsState {
  StrainTensorField strain;
  StrainSplit split;
  Profile nu_T;
  double nu_T_star = 0.0;
  ScalarField nu_t;
  Profile gamma;
  ScalarField length;
};

/// Evaluate the configured closure. `boundary_layer_depth` is only used by the
/// optional upper cutoff.
void update_sgs(const Grid& grid, VelocityRef vel, const ScalarField& theta, const ScalarField& e,
                const WallState& wall, const SgsConfig& cfg, const SimilarityConstants& c,
                SgsState& out, std::optional<double> boundary_layer_depth = std::nullopt);

}  // namespace abl

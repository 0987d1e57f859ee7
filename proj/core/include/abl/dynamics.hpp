#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

#include "abl/grid.hpp"
#include "abl/poisson.hpp"
#include "abl/sgs.hpp"
#include "abl/wall_model.hpp"

namespace abl {

/// theta_s(t) = initial - cooling_per_hour * t / 3600.
struct SurfaceTemperatureRule {
  double initial = 265.0;
  double cooling_per_hour = 0.25;
  double at(double time_s) const { return initial - cooling_per_hour * time_s / 3600.0; }
};

struct PhysicsParams {
  double coriolis = 1.39e-4;
  double ug = 8.0;
  double vg = 0.0;
  double gravity = 9.81;
  double theta0 = 263.5;
  double nu_mol = 0.0;
  double alpha_mol = 0.0;
  double body_force_x = 0.0;         ///< constant streamwise forcing (m/s^2)
  double top_theta_gradient = 0.01;  ///< fixed dtheta/dz at the lid (K/m)
  bool energy = true;                ///< advance theta and couple buoyancy
  SurfaceTemperatureRule surface;
};

struct TimeStepper {
  double cfl_target = 0.5;
  double diff_number_target = 0.25;
  double dt_min = 1e-4;
  double dt_max = 5.0;
  void validate() const;
};

/// Prognostic state. u, v, theta, e at their cell/face locations, w on z-faces
/// with w = 0 on the bottom and top faces.
struct FlowState {
  ScalarField u, v, w, theta, e;
  double time = 0.0;
  std::uint64_t step = 0;

  FlowState() = default;
  FlowState(const Grid& grid, double theta_init);
  bool operator==(const FlowState&) const = default;
};

struct MomentumTendency {
  ScalarField u, v, w;
};

/// Tendencies of u, v, w: skew-symmetric advection, divergence of
/// (nu_mol + gamma nu_t) 2 S, Coriolis relative to the geostrophic wind,
/// buoyancy on w, mean-field vertical diffusion on u and v, wall traction on
/// the bottom face and a stress-free lid.
void momentum_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                  const WallState& wall, const PhysicsParams& params, MomentumTendency& out,
                  double sampling_height);
MomentumTendency momentum_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                              const WallState& wall, const PhysicsParams& params,
                              double sampling_height);

/// Temperature tendency in flux form. Bottom flux Q*, top flux from the fixed
/// lid gradient, fluctuating diffusivity gamma nu_t / Pr_t plus mean-field
/// nu_T / Pr_t acting on <theta>.
void energy_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                const WallState& wall, const PhysicsParams& params, double prandtl,
                ScalarField& out);
ScalarField energy_rhs(const Grid& grid, const FlowState& state, const SgsState& sgs,
                       const WallState& wall, const PhysicsParams& params, double prandtl);

struct StepLimits {
  double advective = 0.0;  ///< largest dt allowed by the CFL target
  double diffusive = 0.0;  ///< largest dt allowed by the diffusion-number target
  double max_speed_sum = 0.0;  ///< max(|u|/dx + |v|/dy + |w|/dz)
  double dt() const { return advective < diffusive ? advective : diffusive; }
};

struct SolverConfig {
  PhysicsParams physics;
  SgsConfig sgs;
  SimilarityConstants similarity;
  TimeStepper stepper;
  /// Absolute sampling height of the wall model; first cell level when unset.
  std::optional<double> sampling_height;
};

/// Owns the workspaces of the three-stage low-storage Runge-Kutta scheme with
/// a pressure projection after every stage.
class Solver {
 public:
  Solver(const Grid& grid, SolverConfig config);

  const Grid& grid() const { return grid_; }
  const SolverConfig& config() const { return config_; }
  double sampling_height() const { return sampling_height_; }

  /// Wall model and closure at `state`; results readable via wall() / sgs().
  void evaluate(const FlowState& state);
  const WallState& wall() const { return wall_; }
  const SgsState& sgs() const { return sgs_; }

  /// Stability limits for the state last passed to evaluate().
  StepLimits limits(const FlowState& state) const;

  /// One step of size dt. Throws CflViolation if dt exceeds the limits.
  void step(FlowState& state, double dt);
  /// One step with the largest stable dt, capped by dt_max and `max_dt`;
  /// returns dt. Throws CflViolation if the stable dt falls below dt_min.
  double advance(FlowState& state, double max_dt = std::numeric_limits<double>::infinity());

  /// Remove the divergent part of (u, v, w) in place.
  void project(ScalarField& u, ScalarField& v, ScalarField& w);

  std::uint64_t clip_events() const { return clip_events_; }
  void set_clip_events(std::uint64_t n) { clip_events_ = n; }
  double last_cfl() const { return last_cfl_; }

 private:
  void run_stages(FlowState& state, double dt);

  Grid grid_;
  SolverConfig config_;
  double sampling_height_ = 0.0;
  PoissonSolver poisson_;
  WallState wall_;
  SgsState sgs_;
  MomentumTendency tend_;
  ScalarField tend_theta_, tend_e_;
  std::array<ScalarField, 5> accum_;
  ScalarField div_, phi_;
  std::uint64_t clip_events_ = 0;
  double last_cfl_ = 0.0;
};

/// Linear interpolation of a cell-level profile to absolute height z.
double interpolate_levels(const Grid& grid, const Profile& f, double z);

}  // namespace abl

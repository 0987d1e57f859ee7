#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "abl/dynamics.hpp"
#include "abl/grid.hpp"
#include "abl/sgs.hpp"
#include "abl/wall_model.hpp"

namespace abl {

enum class CaseKind { Gabls1, Neutral };

std::string to_string(CaseKind kind);
/// Accepts "gabls1" / "neutral", case-insensitive. Throws ConfigError.
CaseKind parse_case_kind(const std::string& name);

struct SlicePlane {
  char axis = 'z';  ///< 'x', 'y' or 'z'
  double coordinate = 0.0;
};

struct OutputPlan {
  std::string dir = "output";
  double profile_interval = 600.0;
  double timeseries_interval = 60.0;
  double checkpoint_interval = 3600.0;
  /// Statistics window in simulated seconds; case default when unset.
  std::optional<double> stats_start;
  std::optional<double> stats_end;
  std::vector<double> spectra_heights;
  std::vector<SlicePlane> slices;
};

struct TkeInit {
  double amplitude = 0.4;  ///< e at the surface (m^2/s^2)
  double depth = 250.0;    ///< height where the cubic profile vanishes (m)
  double floor = 1e-6;
};

struct CaseConfig {
  CaseKind kind = CaseKind::Gabls1;
  int nx = 32, ny = 32, nz = 32;
  double lx = 400.0, ly = 400.0, lz = 400.0;
  PhysicsParams physics;
  SimilarityConstants similarity;
  double z1_plus = 10.0;
  std::optional<double> sampling_height_over_z0;
  SgsConfig sgs;
  TkeInit tke_init;
  TimeStepper stepper;
  double duration_hours = 9.0;
  std::uint64_t seed = 12345;
  double neutral_u_tau = 0.45;
  OutputPlan output;

  static CaseConfig gabls1();
  static CaseConfig neutral();

  /// Throws ConfigError naming the offending key.
  void validate() const;
  Grid grid() const;
  SolverConfig solver_config() const;
  double duration_seconds() const { return duration_hours * 3600.0; }
  double stats_start() const;
  double stats_end() const;
};

FlowState init_gabls(const CaseConfig& config, std::mt19937_64& rng);
FlowState init_gabls(const CaseConfig& config, std::uint64_t seed);

FlowState init_neutral(const CaseConfig& config, std::mt19937_64& rng);
FlowState init_neutral(const CaseConfig& config, std::uint64_t seed);

/// Dispatches on config.kind.
FlowState initialize(const CaseConfig& config, std::mt19937_64& rng);

/// GABLS1 surface rule theta_b = 265 - 0.25 t_hours.
double surface_temperature(double time_s);

/// Log-law u(z) = (u_tau / kappa) ln((z + z0) / z0).
double log_law_velocity(double z, double u_tau, double kappa, double z0);

}  // namespace abl

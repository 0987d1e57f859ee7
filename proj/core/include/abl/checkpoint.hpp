#pragma once

#include <cstdint>
#include <string>

#include "abl/diagnostics.hpp"
#include "abl/dynamics.hpp"

namespace abl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Running statistics carried across restarts.
struct RunStatistics {
  ProfileAccumulator profiles;
  ScalarMean u_tau;
  ScalarMean q_star;
  std::uint64_t clip_events = 0;
};

/// File layout (little-endian):
///   "ABLL" u32 version, u32 nx ny nz, f64 time, u64 step, u64 config hash,
///   u32 length + mt19937_64 state text,
///   f64 arrays u (nx ny nz), v (nx ny nz), w (nx ny (nz+1)), theta, e,
///   u32 length + configuration text, then the RunStatistics block.
struct Checkpoint {
  FlowState state;
  std::string rng_state;
  std::uint64_t config_hash = 0;
  std::string config_text;
  RunStatistics stats;
};

/// Writes to `path` through a temporary file and rename.
void save_checkpoint(const std::string& path, const Checkpoint& cp);

/// Throws CheckpointError on bad magic, version mismatch (both versions named)
/// or truncation.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace abl

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "abl/cases.hpp"
#include "abl/checkpoint.hpp"
#include "abl/diagnostics.hpp"

namespace abl {

struct RunOptions {
  bool resume = false;
  /// Stop after this many steps without a final checkpoint, as if killed.
  std::optional<std::uint64_t> max_steps;
  bool verbose = true;
  bool write_outputs = true;
};

struct RunOutcome {
  FlowState state;
  RunStatistics stats;
  ProfileSet mean;  ///< window average, or the final snapshot if the window is empty
  BulkQuantities bulk;
  bool completed = false;  ///< false when stopped by max_steps
  std::uint64_t steps = 0;  ///< steps taken in this invocation
};

/// Advances the configured case to its duration, writing outputs to
/// config.output.dir. `config_text` is stored in checkpoints for resume and
/// post-processing. Runtime aborts flush a final checkpoint and rethrow.
RunOutcome run_case(const CaseConfig& config, const std::string& config_text,
                    const RunOptions& options = {});

/// Window averages (or a snapshot when none were collected) and the bulk
/// quantities derived from them.
struct Summary {
  ProfileSet mean;
  BulkQuantities bulk;
};
Summary summarize(const CaseConfig& config, const FlowState& state, const RunStatistics& stats);

struct PostOptions {
  std::vector<double> spectra_heights;
  bool profiles = false;
  std::string output_dir;  ///< defaults to <checkpoint dir>/post
};

/// Recomputes bulk.json (and optionally profiles.csv and spectra) from a checkpoint.
void post_process(const std::string& checkpoint_path, const PostOptions& options);

void write_profiles_csv(const std::string& path, const ProfileSet& p);
void write_spectra_csv(const std::string& path, const VelocitySpectra& s, double lx);
void write_bulk_json(const std::string& path, const BulkQuantities& b, double time,
                     std::uint64_t step, std::size_t samples);

/// File name of the spectra output for height z, e.g. "spectra_z100.csv".
std::string spectra_file_name(double z);

}  // namespace abl

// Command-line driver: `abl run` and `abl post`.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef ABL_HAVE_OPENMP
#include <omp.h>
#endif

#include "abl/config.hpp"
#include "abl/errors.hpp"
#include "abl/run.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<double> parse_heights(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (std::string s : items) {
    if (s.rfind("z=", 0) == 0) s = s.substr(2);
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) {
        char* end = nullptr;
        const double z = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size()) throw abl::ConfigError("--spectra", "bad height '" + tok + "'");
        out.push_back(z);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-eddy simulation of stable and neutral atmospheric boundary layers"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  int threads = 0;
  std::uint64_t max_steps = 0;
  auto* run = app.add_subcommand("run", "Run a case from a configuration file");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_flag("--resume", resume, "Continue from the latest checkpoint in the output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--max-steps", max_steps, "Stop after N steps without a final checkpoint");

  std::string checkpoint_path;
  std::vector<std::string> spectra;
  bool profiles = false;
  std::string post_dir;
  auto* post = app.add_subcommand("post", "Recompute diagnostics from a checkpoint");
  post->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
  post->add_option("--spectra", spectra, "Spectra heights, e.g. z=100 or z=50,100");
  post->add_flag("--profiles", profiles, "Write profiles.csv");
  post->add_option("--out", post_dir, "Output directory (default <checkpoint dir>/post)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

#ifdef ABL_HAVE_OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*run) {
      std::string text;
      abl::CaseConfig config = abl::load_config(config_path, &text);
      abl::apply_environment(config);
      abl::RunOptions opts;
      opts.resume = resume;
      if (max_steps > 0) opts.max_steps = max_steps;
      const abl::RunOutcome out = abl::run_case(config, text, opts);
      if (out.completed)
        fmt::print(stderr, "done: t = {:.1f} s, {} steps, u_tau = {:.4f} m/s\n", out.state.time,
                   out.state.step, out.bulk.u_tau);
      else
        fmt::print(stderr, "stopped after {} steps at t = {:.1f} s\n", out.steps, out.state.time);
    } else {
      abl::PostOptions opts;
      opts.spectra_heights = parse_heights(spectra);
      opts.profiles = profiles;
      opts.output_dir = post_dir;
      abl::post_process(checkpoint_path, opts);
    }
  } catch (const abl::ConfigError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "abl/checkpoint.hpp"
#include "abl/config.hpp"
#include "abl/errors.hpp"
#include "abl/run.hpp"
#include "oracles.hpp"

namespace abl {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("abl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string tiny_config(const fs::path& out, const std::string& extra = "") {
  return "[case]\nname = gabls1\nduration_hours = 0.02\nseed = 4\n"
         "[grid]\nnx = 8\nny = 8\nnz = 8\n"
         "[output]\ndir = " + out.string() +
         "\nprofile_interval = 36\ntimeseries_interval = 12\ncheckpoint_interval = 36\n"
         "stats_start_hours = 0\nspectra_heights = 100\n" + extra;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ABL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, ParsesSectionsAndDefaults) {
  const CaseConfig c = parse_config(
      "; comment\n[case]\nname = neutral\n[grid]\nnx = 24\n[sgs]\nmodel = mfev_tke_drd\nprandtl = 0.5\n"
      "[output]\nspectra_heights = 50, 100\nslices = z:100,x:200\nstats_start_hours = 2\n");
  EXPECT_EQ(c.kind, CaseKind::Neutral);
  EXPECT_EQ(c.nx, 24);
  EXPECT_EQ(c.ny, 48);
  EXPECT_EQ(c.sgs.model, SgsModel::MfevTkeDrd);
  EXPECT_DOUBLE_EQ(c.sgs.prandtl, 0.5);
  ASSERT_EQ(c.output.spectra_heights.size(), 2u);
  EXPECT_DOUBLE_EQ(c.output.spectra_heights[1], 100.0);
  ASSERT_EQ(c.output.slices.size(), 2u);
  EXPECT_EQ(c.output.slices[1].axis, 'x');
  EXPECT_DOUBLE_EQ(c.stats_start(), 7200.0);
}

TEST(Config, ErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of("[grid]\nnx = 0\n"), "grid.nx");
  EXPECT_EQ(key_of("[grid]\nnx = eight\n"), "grid.nx");
  EXPECT_EQ(key_of("[grid]\nnq = 8\n"), "grid.nq");
  EXPECT_EQ(key_of("[sgs]\nmodel = wale\n"), "sgs.model");
  EXPECT_EQ(key_of("[case]\nname = convective\n"), "case.name");
  EXPECT_EQ(key_of("[wall]\nbeta_h = 1\n"), "wall.beta_h");
  EXPECT_EQ(key_of("[bogus]\nx = 1\n"), "bogus");
  EXPECT_EQ(key_of("[grid]\nnx = 8\n"), "<none>");
}

TEST(Config, EnvironmentOverridesOutputDir) {
  CaseConfig c = parse_config("[output]\ndir = a\n");
  setenv("ABL_OUTPUT_DIR", "/tmp/elsewhere", 1);
  apply_environment(c);
  unsetenv("ABL_OUTPUT_DIR");
  EXPECT_EQ(c.output.dir, "/tmp/elsewhere");
  apply_environment(c);
  EXPECT_EQ(c.output.dir, "/tmp/elsewhere");
}

TEST(Config, HashIsFnv1a) {
  EXPECT_EQ(config_hash(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(config_hash("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(config_hash("[grid]\nnx=8"), config_hash("[grid]\nnx=9"));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const fs::path dir = scratch("roundtrip");
  const Grid g = Grid::make(6, 5, 4, 60, 50, 40, 1.0);
  Checkpoint cp;
  cp.state = FlowState(g, 265.0);
  cp.state.u.values() = testing::random_values(cp.state.u.size(), 1);
  cp.state.w.values() = testing::random_values(cp.state.w.size(), 2);
  cp.state.e.values() = testing::random_values(cp.state.e.size(), 3);
  cp.state.time = 1234.5678901234;
  cp.state.step = 987654321;
  cp.rng_state = "1 2 3";
  cp.config_text = "[grid]\nnx = 6\nny = 5\nnz = 4\nlx = 60\nly = 50\nlz = 40\n";
  cp.config_hash = config_hash(cp.config_text);
  cp.stats.clip_events = 7;
  ProfileSet p;
  for (Profile* c : p.columns()) c->assign(4, 0.25);
  cp.stats.profiles.restore(p, 11);
  cp.stats.u_tau.restore(0.27, 5);
  cp.stats.q_star.restore(-0.01, 5);

  const std::string path = (dir / "c.bin").string();
  save_checkpoint(path, cp);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.state, cp.state);
  EXPECT_EQ(back.rng_state, cp.rng_state);
  EXPECT_EQ(back.config_text, cp.config_text);
  EXPECT_EQ(back.config_hash, cp.config_hash);
  EXPECT_EQ(back.stats.clip_events, 7u);
  EXPECT_EQ(back.stats.profiles.samples(), 11u);
  EXPECT_EQ(back.stats.profiles.mean().ri, p.ri);
  EXPECT_EQ(back.stats.u_tau.value(), 0.27);
  EXPECT_EQ(back.stats.q_star.count(), 5u);
  EXPECT_FALSE(fs::exists(path + ".tmp"));
}

TEST(Checkpoint, RejectsForeignAndDamagedFiles) {
  const fs::path dir = scratch("damaged");
  write_text(dir / "junk.bin", "not a checkpoint at all");
  EXPECT_THROW(load_checkpoint((dir / "junk.bin").string()), CheckpointError);
  EXPECT_THROW(load_checkpoint((dir / "missing.bin").string()), CheckpointError);

  const Grid g = Grid::make(4, 4, 4, 40, 40, 40, 1.0);
  Checkpoint cp;
  cp.state = FlowState(g, 265.0);
  cp.config_text = "[grid]\nnx = 4\nny = 4\nnz = 4\nlx = 40\nly = 40\nlz = 40\n";
  cp.config_hash = config_hash(cp.config_text);
  const fs::path good = dir / "good.bin";
  save_checkpoint(good.string(), cp);
  std::string bytes = read_file(good);

  std::string other = bytes;
  other[4] = 9;  // version field
  write_text(dir / "version.bin", other);
  try {
    load_checkpoint((dir / "version.bin").string());
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version 9"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("version 1"), std::string::npos);
  }
  write_text(dir / "short.bin", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_checkpoint((dir / "short.bin").string()), CheckpointError);
}

TEST(Run, ResumeMatchesUninterruptedRun) {
  const fs::path a = scratch("run_full"), b = scratch("run_resumed");
  const std::string ta = tiny_config(a), tb = tiny_config(b);
  RunOptions quiet;
  quiet.verbose = false;
  const RunOutcome full = run_case(parse_config(ta), ta, quiet);
  ASSERT_TRUE(full.completed);

  RunOptions killed = quiet;
  killed.max_steps = full.steps * 2 / 3;
  const RunOutcome part = run_case(parse_config(tb), tb, killed);
  EXPECT_FALSE(part.completed);
  ASSERT_TRUE(fs::exists(b / "checkpoint.bin"));

  RunOptions resume = quiet;
  resume.resume = true;
  const RunOutcome rest = run_case(parse_config(tb), tb, resume);
  ASSERT_TRUE(rest.completed);
  EXPECT_EQ(rest.state, full.state);
  EXPECT_EQ(read_file(a / "timeseries.csv"), read_file(b / "timeseries.csv"));
  EXPECT_EQ(read_file(a / "bulk.json"), read_file(b / "bulk.json"));
  EXPECT_EQ(read_file(a / "profiles.csv"), read_file(b / "profiles.csv"));
}

TEST(Run, ResumeWithDifferentConfigIsRejected) {
  const fs::path a = scratch("run_mismatch");
  const std::string ta = tiny_config(a);
  RunOptions quiet;
  quiet.verbose = false;
  quiet.max_steps = 1000000;
  run_case(parse_config(ta), ta, quiet);
  const std::string tb = tiny_config(a, "; edited\n");
  RunOptions resume = quiet;
  resume.resume = true;
  EXPECT_THROW(run_case(parse_config(tb), tb, resume), ConfigError);
}

TEST(Run, WritesOutputs) {
  const fs::path a = scratch("run_outputs");
  const std::string ta = tiny_config(a, "slices = z:100\n");
  RunOptions quiet;
  quiet.verbose = false;
  const RunOutcome r = run_case(parse_config(ta), ta, quiet);
  for (const char* f : {"timeseries.csv", "profiles.csv", "bulk.json", "checkpoint.bin", "spectra_z100.csv",
                        "profiles_t0000036.csv", "slice_z100_t0000072.csv"})
    EXPECT_TRUE(fs::exists(a / f)) << f;
  const auto j = nlohmann::json::parse(read_file(a / "bulk.json"));
  EXPECT_NEAR(j["u_tau"].get<double>(), r.bulk.u_tau, 1e-12 * r.bulk.u_tau);
  std::ifstream ts(a / "timeseries.csv");
  std::string line;
  int rows = 0;
  while (std::getline(ts, line)) ++rows;
  EXPECT_EQ(rows, 1 + 1 + 6);
  EXPECT_EQ(spectra_file_name(100.0), "spectra_z100.csv");
  EXPECT_EQ(spectra_file_name(12.5), "spectra_z12.5.csv");
}

TEST(Cli, ExitCodes) {
  const fs::path a = scratch("cli");
  write_text(a / "good.ini", tiny_config(a / "out"));
  write_text(a / "bad.ini", "[grid]\nnx = 0\n");
  write_text(a / "junk.bin", "garbage");
  EXPECT_EQ(run_cli("run " + (a / "good.ini").string() + " --threads 1"), 0);
  EXPECT_EQ(run_cli("run " + (a / "bad.ini").string()), 1);
  EXPECT_EQ(run_cli("run " + (a / "absent.ini").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("post " + (a / "junk.bin").string()), 2);

  const fs::path ckpt = a / "out" / "checkpoint.bin";
  EXPECT_EQ(run_cli("post " + ckpt.string() + " --spectra z=100 --profiles --out " + (a / "post").string()), 0);
  EXPECT_EQ(read_file(a / "out" / "bulk.json"), read_file(a / "post" / "bulk.json"));
  EXPECT_EQ(read_file(a / "out" / "spectra_z100.csv"), read_file(a / "post" / "spectra_z100.csv"));
  EXPECT_TRUE(fs::exists(a / "post" / "profiles.csv"));
}

}  // namespace
}  // namespace abl

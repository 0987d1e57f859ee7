#include "abl/run.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "abl/config.hpp"
#include "abl/errors.hpp"

namespace abl {
namespace fs = std::filesystem;
namespace {

constexpr const char* kTimeseriesHeader = "t,u_tau,q_star,l_mo,theta_b,dt,cfl";

bool crossed(double t_old, double t_new, double interval) {
  return std::floor(t_new / interval) > std::floor(t_old / interval);
}

StatisticsParams statistics_params(const CaseConfig& c) {
  return {c.physics.gravity, c.physics.theta0, c.sgs.prandtl, c.sgs.ck, c.sgs.uses_tke()};
}

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

std::string timeseries_row(const FlowState& s, const WallState& wall, const CaseConfig& c,
                           double dt, double cfl) {
  const double l_mo = obukhov_from_surface(wall.u_tau, wall.heat_flux, c.similarity.kappa,
                                           c.physics.gravity, c.physics.theta0);
  return fmt::format("{},{},{},{},{},{},{}\n", num(s.time), num(wall.u_tau), num(wall.heat_flux),
                     num(l_mo), num(c.physics.surface.at(s.time)), num(dt), num(cfl));
}

// Keeps the header and rows up to time t, so a resumed run appends exactly
// what an uninterrupted run would have written.
std::string truncated_timeseries(const fs::path& path, double t) {
  std::ifstream in(path);
  std::string out = std::string(kTimeseriesHeader) + "\n";
  if (!in) return out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const double tr = std::strtod(line.c_str(), nullptr);
    if (tr <= t) out += line + "\n";
  }
  return out;
}

void write_slice(const fs::path& path, const Grid& g, const FlowState& s, const SlicePlane& p) {
  auto out = fmt::output_file(path.string());
  auto uc = [&](int i, int j, int k) { return 0.5 * (s.u(i, j, k) + s.u(g.wrap_x(i + 1), j, k)); };
  auto vc = [&](int i, int j, int k) { return 0.5 * (s.v(i, j, k) + s.v(i, g.wrap_y(j + 1), k)); };
  auto wc = [&](int i, int j, int k) { return 0.5 * (s.w(i, j, k) + s.w(i, j, k + 1)); };
  auto row = [&](double a, double b, int i, int j, int k) {
    out.print("{},{},{},{},{},{}\n", num(a), num(b), num(uc(i, j, k)), num(vc(i, j, k)),
              num(wc(i, j, k)), num(s.theta(i, j, k)));
  };
  if (p.axis == 'z') {
    const int k = std::clamp(static_cast<int>(std::lround((p.coordinate - g.z_center(0)) / g.dz)), 0, g.nz - 1);
    out.print("x,y,u,v,w,theta\n");
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) row(g.x_center(i), g.y_center(j), i, j, k);
  } else if (p.axis == 'y') {
    const int j = g.wrap_y(static_cast<int>(std::floor(p.coordinate / g.dy)));
    out.print("x,z,u,v,w,theta\n");
    for (int k = 0; k < g.nz; ++k)
      for (int i = 0; i < g.nx; ++i) row(g.x_center(i), g.z_center(k), i, j, k);
  } else {
    const int i = g.wrap_x(static_cast<int>(std::floor(p.coordinate / g.dx)));
    out.print("y,z,u,v,w,theta\n");
    for (int k = 0; k < g.nz; ++k)
      for (int j = 0; j < g.ny; ++j) row(g.y_center(j), g.z_center(k), i, j, k);
  }
}

}  // namespace

std::string spectra_file_name(double z) { return fmt::format("spectra_z{:g}.csv", z); }

void write_profiles_csv(const std::string& path, const ProfileSet& p) {
  auto out = fmt::output_file(path);
  const auto& names = ProfileSet::column_names();
  for (std::size_t c = 0; c < names.size(); ++c) out.print("{}{}", c ? "," : "", names[c]);
  out.print("\n");
  const auto cols = p.columns();
  for (int k = 0; k < p.levels(); ++k) {
    for (std::size_t c = 0; c < cols.size(); ++c) out.print("{}{}", c ? "," : "", num((*cols[c])[k]));
    out.print("\n");
  }
}

void write_spectra_csv(const std::string& path, const VelocitySpectra& s, double lx) {
  auto out = fmt::output_file(path);
  out.print("k,wavenumber,E_u,E_v,E_h\n");
  constexpr double two_pi = 6.283185307179586;
  for (std::size_t m = 0; m < s.u.energy.size(); ++m)
    out.print("{},{},{},{},{}\n", m, num(two_pi * m / lx), num(s.u.energy[m]), num(s.v.energy[m]),
              num(s.u.energy[m] + s.v.energy[m]));
}

void write_bulk_json(const std::string& path, const BulkQuantities& b, double time,
                     std::uint64_t step, std::size_t samples) {
  auto finite_or_null = [](double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["time"] = time;
  j["step"] = step;
  j["samples"] = samples;
  j["u_tau"] = finite_or_null(b.u_tau);
  j["q_star"] = finite_or_null(b.q_star);
  j["z_i"] = finite_or_null(b.z_i);
  j["z_i_converged"] = b.z_i_converged;
  j["l_mo"] = finite_or_null(b.l_mo);
  j["z_i_over_l_mo"] = finite_or_null(b.z_i_over_l_mo);
  j["z_j"] = finite_or_null(b.z_j);
  j["z_j_valid"] = b.z_j_valid;
  j["z_j_over_z_i"] = finite_or_null(b.z_j_over_z_i);
  write_file(path, j.dump(2) + "\n");
}

Summary summarize(const CaseConfig& config, const FlowState& state, const RunStatistics& stats) {
  const Grid g = config.grid();
  const StatisticsParams sp = statistics_params(config);
  Summary s;
  double u_tau = stats.u_tau.value();
  double q_star = stats.q_star.value();
  if (stats.profiles.samples() > 0) {
    s.mean = stats.profiles.result(g.dz, sp);
  } else {
    Solver solver(g, config.solver_config());
    solver.evaluate(state);
    s.mean = snapshot_profiles(g, state, solver.sgs(), sp);
    u_tau = solver.wall().u_tau;
    q_star = solver.wall().heat_flux;
  }
  s.bulk = bulk_quantities(s.mean, u_tau, q_star, config.similarity.kappa, config.physics.gravity,
                           config.physics.theta0, g.z_face(g.nz));
  return s;
}

RunOutcome run_case(const CaseConfig& config, const std::string& config_text,
                    const RunOptions& options) {
  config.validate();
  const Grid g = config.grid();
  const fs::path dir(config.output.dir);
  const fs::path ckpt_path = dir / "checkpoint.bin";
  const fs::path ts_path = dir / "timeseries.csv";
  if (options.write_outputs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
      throw ConfigError("output.dir", "cannot create '" + dir.string() + "'");
  }
  const std::uint64_t hash = config_hash(config_text);
  const StatisticsParams sp = statistics_params(config);

  RunOutcome out;
  std::mt19937_64 rng(config.seed);
  if (options.resume) {
    Checkpoint cp = load_checkpoint(ckpt_path.string());
    if (cp.config_hash != hash)
      throw ConfigError("<file>", "checkpoint '" + ckpt_path.string() +
                                      "' was written with a different configuration");
    std::istringstream rs(cp.rng_state);
    rs >> rng;
    if (!rs) throw CheckpointError("corrupt random generator state in checkpoint");
    out.state = std::move(cp.state);
    out.stats = std::move(cp.stats);
  } else {
    out.state = initialize(config, rng);
  }

  Solver solver(g, config.solver_config());
  solver.set_clip_events(out.stats.clip_events);
  FlowState& state = out.state;
  RunStatistics& stats = out.stats;
  const OutputPlan& plan = config.output;

  auto checkpoint = [&](const FlowState& s) {
    if (!options.write_outputs) return;
    stats.clip_events = solver.clip_events();
    save_checkpoint(ckpt_path.string(), {s, rng_text(rng), hash, config_text, stats});
  };

  std::ofstream ts;
  if (options.write_outputs) {
    const std::string head =
        options.resume ? truncated_timeseries(ts_path, state.time) : std::string(kTimeseriesHeader) + "\n";
    write_file(ts_path, head);
    ts.open(ts_path, std::ios::app | std::ios::binary);
    if (!options.resume) {
      solver.evaluate(state);
      ts << timeseries_row(state, solver.wall(), config, 0.0, 0.0);
    }
  }

  const double t_end = config.duration_seconds();
  const double w0 = config.stats_start(), w1 = config.stats_end();
  const auto clock0 = std::chrono::steady_clock::now();
  FlowState last_good;
  while (state.time < t_end) {
    if (options.max_steps && out.steps >= *options.max_steps) {
      ts.flush();
      out.stats.clip_events = solver.clip_events();
      return out;
    }
    last_good = state;
    const double t_old = state.time;
    double dt = 0.0;
    try {
      dt = solver.advance(state, t_end - state.time);
      if (!state.u.all_finite() || !state.v.all_finite() || !state.w.all_finite() ||
          !state.theta.all_finite() || !state.e.all_finite())
        throw Error(fmt::format("non-finite state at step {}", state.step));
    } catch (const Error& err) {
      if (options.verbose) fmt::print(stderr, "abort at t = {:.3f} s: {}\n", t_old, err.what());
      checkpoint(last_good);
      throw;
    }
    ++out.steps;
    const double t = state.time;
    // Snap to the end time to avoid a sliver step from rounding.
    if (t_end - t < 1e-9 * t_end) state.time = t_end;
    const double cfl = solver.last_cfl();

    const bool sample = crossed(t_old, state.time, plan.timeseries_interval);
    const bool profile_out = crossed(t_old, state.time, plan.profile_interval);
    if (sample || profile_out) solver.evaluate(state);
    if (sample) {
      if (options.write_outputs) ts << timeseries_row(state, solver.wall(), config, dt, cfl);
      if (state.time >= w0 && state.time <= w1) {
        stats.profiles.add(snapshot_profiles(g, state, solver.sgs(), sp));
        stats.u_tau.add(solver.wall().u_tau);
        stats.q_star.add(solver.wall().heat_flux);
      }
    }
    if (profile_out) {
      if (options.write_outputs) {
        ts.flush();
        // Stamp with the output boundary just crossed, not the raw step time.
        const auto stamp = static_cast<long long>(
            std::llround(std::floor(state.time / plan.profile_interval) * plan.profile_interval));
        write_profiles_csv((dir / fmt::format("profiles_t{:07d}.csv", stamp)).string(),
                           snapshot_profiles(g, state, solver.sgs(), sp));
        if (stats.profiles.samples() > 0)
          write_profiles_csv((dir / "profiles.csv").string(), stats.profiles.result(g.dz, sp));
        for (const auto& sl : plan.slices)
          write_slice(dir / fmt::format("slice_{}{:g}_t{:07d}.csv", sl.axis, sl.coordinate, stamp),
                      g, state, sl);
      }
      if (options.verbose) {
        const double wall_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
        fmt::print(stderr, "t = {:8.1f} s  step {:7d}  dt {:.3f}  u_tau {:.4f}  Q* {:.5f}  ({:.0f} s)\n",
                   state.time, state.step, dt, solver.wall().u_tau, solver.wall().heat_flux, wall_s);
      }
    }
    if (crossed(t_old, state.time, plan.checkpoint_interval)) {
      ts.flush();
      checkpoint(state);
    }
  }

  stats.clip_events = solver.clip_events();
  out.completed = true;
  Summary sum = summarize(config, state, stats);
  out.mean = std::move(sum.mean);
  out.bulk = sum.bulk;
  if (options.write_outputs) {
    ts.close();
    checkpoint(state);
    write_profiles_csv((dir / "profiles.csv").string(), out.mean);
    write_bulk_json((dir / "bulk.json").string(), out.bulk, state.time, state.step,
                    stats.profiles.samples());
    for (double z : plan.spectra_heights)
      write_spectra_csv((dir / spectra_file_name(z)).string(), velocity_spectra(g, state, z), g.lx);
  }
  return out;
}

void post_process(const std::string& checkpoint_path, const PostOptions& options) {
  const Checkpoint cp = load_checkpoint(checkpoint_path);
  const CaseConfig config = parse_config(cp.config_text);
  const Grid g = config.grid();
  fs::path dir = options.output_dir.empty() ? fs::path(checkpoint_path).parent_path() / "post"
                                            : fs::path(options.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("cannot create '" + dir.string() + "'");

  const Summary sum = summarize(config, cp.state, cp.stats);
  write_bulk_json((dir / "bulk.json").string(), sum.bulk, cp.state.time, cp.state.step,
                  cp.stats.profiles.samples());
  if (options.profiles) write_profiles_csv((dir / "profiles.csv").string(), sum.mean);
  for (double z : options.spectra_heights)
    write_spectra_csv((dir / spectra_file_name(z)).string(), velocity_spectra(g, cp.state, z), g.lx);
}

}  // namespace abl

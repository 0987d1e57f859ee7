#include "abl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "abl/errors.hpp"

namespace abl {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"case", {"name", "duration_hours", "seed", "neutral_u_tau"}},
      {"grid", {"nx", "ny", "nz", "lx", "ly", "lz"}},
      {"physics",
       {"coriolis", "ug", "vg", "gravity", "theta0", "nu_mol", "alpha_mol", "surface_theta",
        "cooling_rate", "top_theta_gradient"}},
      {"wall", {"kappa", "beta_m", "beta_h", "z0", "z1_plus", "sampling_height_over_z0"}},
      {"sgs",
       {"model", "ck", "ceps", "cs_global", "prandtl", "mfev_upper_cutoff", "e_init_amplitude",
        "e_init_depth", "e_floor"}},
      {"time", {"cfl", "diffusion_number", "dt_min", "dt_max"}},
      {"output",
       {"dir", "profile_interval", "timeseries_interval", "checkpoint_interval",
        "stats_start_hours", "stats_end_hours", "spectra_heights", "slices"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(key, "empty value");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) throw ConfigError(key, "empty value");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw ConfigError(key, "expected an integer, got '" + s + "'");
  return v;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  const std::string* raw(const std::string& key) {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return nullptr;
    store_[key] = *v;
    return &store_[key];
  }
  void number(const std::string& key, double& out) {
    if (const auto* s = raw(key)) out = to_double(key, *s);
  }
  void optional_number(const std::string& key, std::optional<double>& out) {
    if (const auto* s = raw(key)) {
      if (trim(*s) == "none" || trim(*s).empty())
        out.reset();
      else
        out = to_double(key, *s);
    }
  }
  void integer(const std::string& key, int& out) {
    if (const auto* s = raw(key)) {
      const long long v = to_integer(key, *s);
      if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(key, "out of range");
      out = static_cast<int>(v);
    }
  }
  void text(const std::string& key, std::string& out) {
    if (const auto* s = raw(key)) out = trim(*s);
  }

 private:
  const pt::ptree& tree_;
  std::map<std::string, std::string> store_;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

CaseConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("<file>", "line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end())
      throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  Reader r(tree);
  std::string name = "gabls1";
  r.text("case.name", name);
  CaseConfig c = parse_case_kind(name) == CaseKind::Gabls1 ? CaseConfig::gabls1()
                                                             : CaseConfig::neutral();

  r.number("case.duration_hours", c.duration_hours);
  if (const auto* s = r.raw("case.seed")) {
    const long long v = to_integer("case.seed", *s);
    if (v < 0) throw ConfigError("case.seed", "must be non-negative");
    c.seed = static_cast<std::uint64_t>(v);
  }
  r.number("case.neutral_u_tau", c.neutral_u_tau);

  r.integer("grid.nx", c.nx);
  r.integer("grid.ny", c.ny);
  r.integer("grid.nz", c.nz);
  r.number("grid.lx", c.lx);
  r.number("grid.ly", c.ly);
  r.number("grid.lz", c.lz);

  r.number("physics.coriolis", c.physics.coriolis);
  r.number("physics.ug", c.physics.ug);
  r.number("physics.vg", c.physics.vg);
  r.number("physics.gravity", c.physics.gravity);
  r.number("physics.theta0", c.physics.theta0);
  r.number("physics.nu_mol", c.physics.nu_mol);
  r.number("physics.alpha_mol", c.physics.alpha_mol);
  r.number("physics.surface_theta", c.physics.surface.initial);
  r.number("physics.cooling_rate", c.physics.surface.cooling_per_hour);
  r.number("physics.top_theta_gradient", c.physics.top_theta_gradient);
  c.similarity.gravity = c.physics.gravity;
  c.similarity.theta0 = c.physics.theta0;

  r.number("wall.kappa", c.similarity.kappa);
  r.number("wall.beta_m", c.similarity.beta_m);
  r.number("wall.beta_h", c.similarity.beta_h);
  r.number("wall.z0", c.similarity.z0);
  r.number("wall.z1_plus", c.z1_plus);
  r.optional_number("wall.sampling_height_over_z0", c.sampling_height_over_z0);
  c.similarity.z1 = c.z1_plus * c.similarity.z0;

  if (const auto* s = r.raw("sgs.model")) {
    const auto model = parse_sgs_model(trim(*s));
    if (!model) throw ConfigError("sgs.model", "unknown model '" + trim(*s) + "'");
    c.sgs.model = *model;
  }
  r.number("sgs.ck", c.sgs.ck);
  r.number("sgs.ceps", c.sgs.ceps);
  r.number("sgs.cs_global", c.sgs.cs_global);
  r.number("sgs.prandtl", c.sgs.prandtl);
  r.optional_number("sgs.mfev_upper_cutoff", c.sgs.mfev_upper_cutoff);
  r.number("sgs.e_init_amplitude", c.tke_init.amplitude);
  r.number("sgs.e_init_depth", c.tke_init.depth);
  r.number("sgs.e_floor", c.tke_init.floor);

  r.number("time.cfl", c.stepper.cfl_target);
  r.number("time.diffusion_number", c.stepper.diff_number_target);
  r.number("time.dt_min", c.stepper.dt_min);
  r.number("time.dt_max", c.stepper.dt_max);

  r.text("output.dir", c.output.dir);
  r.number("output.profile_interval", c.output.profile_interval);
  r.number("output.timeseries_interval", c.output.timeseries_interval);
  r.number("output.checkpoint_interval", c.output.checkpoint_interval);
  std::optional<double> start_h, end_h;
  r.optional_number("output.stats_start_hours", start_h);
  r.optional_number("output.stats_end_hours", end_h);
  if (start_h) c.output.stats_start = *start_h * 3600.0;
  if (end_h) c.output.stats_end = *end_h * 3600.0;
  if (const auto* s = r.raw("output.spectra_heights")) {
    c.output.spectra_heights.clear();
    for (const auto& item : split_list(*s))
      c.output.spectra_heights.push_back(to_double("output.spectra_heights", item));
  }
  if (const auto* s = r.raw("output.slices")) {
    c.output.slices.clear();
    for (const auto& item : split_list(*s)) {
      const auto colon = item.find(':');
      if (colon != 1) throw ConfigError("output.slices", "expected axis:coordinate, got '" + item + "'");
      c.output.slices.push_back({item[0], to_double("output.slices", item.substr(2))});
    }
  }

  c.validate();
  return c;
}

CaseConfig load_config(const std::string& path, std::string* text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  if (text) *text = content;
  return parse_config(content);
}

void apply_environment(CaseConfig& config) {
  if (const char* dir = std::getenv("ABL_OUTPUT_DIR"); dir && *dir) config.output.dir = dir;
}

std::uint64_t config_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace abl

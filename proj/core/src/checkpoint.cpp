#include "abl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "abl/config.hpp"
#include "abl/errors.hpp"

namespace abl {
namespace {

constexpr char kMagic[4] = {'A', 'B', 'L', 'L'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <class T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void put_array(const std::vector<double>& a) {
    for (double x : a) put(x);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <class T>
  T get() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw CheckpointError("checkpoint truncated");
    return to_little(v);
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    in_.read(s.data(), n);
    if (!in_) throw CheckpointError("checkpoint truncated");
    return s;
  }
  std::vector<double> get_array(std::size_t n) {
    std::vector<double> a(n);
    for (auto& x : a) x = get<double>();
    return a;
  }

 private:
  std::istream& in_;
};

void put_profiles(Writer& w, const ProfileSet& p) {
  const auto cols = p.columns();
  const std::uint32_t nz = static_cast<std::uint32_t>(p.z.size());
  w.put(static_cast<std::uint32_t>(cols.size()));
  w.put(nz);
  for (const Profile* c : cols) {
    if (c->size() != nz) throw CheckpointError("inconsistent profile accumulator");
    w.put_array(*c);
  }
}

ProfileSet get_profiles(Reader& r) {
  ProfileSet p;
  auto cols = p.columns();
  const auto ncols = r.get<std::uint32_t>();
  const auto nz = r.get<std::uint32_t>();
  if (ncols != cols.size()) throw CheckpointError("profile column count mismatch");
  for (Profile* c : cols) *c = r.get_array(nz);
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  const FlowState& s = cp.state;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint '" + tmp + "'");
    Writer w(out);
    out.write(kMagic, 4);
    w.put(kCheckpointVersion);
    w.put(static_cast<std::uint32_t>(s.theta.nx()));
    w.put(static_cast<std::uint32_t>(s.theta.ny()));
    w.put(static_cast<std::uint32_t>(s.theta.levels()));
    w.put(s.time);
    w.put(s.step);
    w.put(cp.config_hash);
    w.put_string(cp.rng_state);
    for (const ScalarField* f : {&s.u, &s.v, &s.w, &s.theta, &s.e}) w.put_array(f->values());

    w.put_string(cp.config_text);
    w.put(cp.stats.clip_events);
    w.put(static_cast<std::uint64_t>(cp.stats.profiles.samples()));
    if (cp.stats.profiles.samples() > 0) put_profiles(w, cp.stats.profiles.mean());
    w.put(cp.stats.u_tau.value());
    w.put(static_cast<std::uint64_t>(cp.stats.u_tau.count()));
    w.put(cp.stats.q_star.value());
    w.put(static_cast<std::uint64_t>(cp.stats.q_star.count()));
    out.flush();
    if (!out) throw CheckpointError("failed writing checkpoint '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot rename checkpoint to '" + path + "': " + ec.message());
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError("'" + path + "' is not a checkpoint (bad magic)");
  Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint format version " + std::to_string(version) +
                          " is not supported (expected version " +
                          std::to_string(kCheckpointVersion) + ")");
  const auto nx = r.get<std::uint32_t>();
  const auto ny = r.get<std::uint32_t>();
  const auto nz = r.get<std::uint32_t>();
  if (nx == 0 || ny == 0 || nz == 0 || std::uint64_t(nx) * ny * (nz + 1) > (1ULL << 32))
    throw CheckpointError("implausible checkpoint dimensions");

  Checkpoint cp;
  const double time = r.get<double>();
  const auto step = r.get<std::uint64_t>();
  cp.config_hash = r.get<std::uint64_t>();
  cp.rng_state = r.get_string();
  const std::size_t cells = std::size_t(nx) * ny * nz;
  std::vector<double> u = r.get_array(cells);
  std::vector<double> v = r.get_array(cells);
  std::vector<double> w = r.get_array(cells + std::size_t(nx) * ny);
  std::vector<double> t = r.get_array(cells);
  std::vector<double> e = r.get_array(cells);

  cp.config_text = r.get_string();
  cp.stats.clip_events = r.get<std::uint64_t>();
  const auto samples = r.get<std::uint64_t>();
  if (samples > 0) cp.stats.profiles.restore(get_profiles(r), samples);
  {
    const double m = r.get<double>();
    cp.stats.u_tau.restore(m, r.get<std::uint64_t>());
  }
  {
    const double m = r.get<double>();
    cp.stats.q_star.restore(m, r.get<std::uint64_t>());
  }

  if (config_hash(cp.config_text) != cp.config_hash)
    throw CheckpointError("checkpoint configuration does not match its hash");
  CaseConfig config;
  try {
    config = parse_config(cp.config_text);
  } catch (const ConfigError& err) {
    throw CheckpointError(std::string("embedded configuration invalid: ") + err.what());
  }
  const Grid g = config.grid();
  if (std::uint32_t(g.nx) != nx || std::uint32_t(g.ny) != ny || std::uint32_t(g.nz) != nz)
    throw CheckpointError("checkpoint dimensions do not match its configuration");

  cp.state = FlowState(g, 0.0);
  cp.state.u.values() = std::move(u);
  cp.state.v.values() = std::move(v);
  cp.state.w.values() = std::move(w);
  cp.state.theta.values() = std::move(t);
  cp.state.e.values() = std::move(e);
  cp.state.time = time;
  cp.state.step = step;
  return cp;
}

}  // namespace abl

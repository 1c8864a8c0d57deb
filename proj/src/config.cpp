#include "kpline/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace kpline {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ConfigError(key, "expected a finite number, got '" + text + "'");
  return value;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  Int value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::string format_double(double v) {
  // Shortest text that parses back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Members are exposed through mutable accessors; reads go through a copy.
template <class Member>
auto read_member(Member member, const RunConfig& c) {
  RunConfig copy = c;
  return member(copy);
}

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Field real_field(const std::string& key, Member member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { member(c) = parse_double(key, v); },
          [member](const RunConfig& c) { return format_double(read_member(member, c)); }};
}

template <class Int, class Member>
Field int_field(const std::string& key, Member member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { member(c) = parse_integer<Int>(key, v); },
          [member](const RunConfig& c) { return std::to_string(read_member(member, c)); }};
}

template <class Member>
Field bool_field(const std::string& key, Member member) {
  return {key, [key, member](RunConfig& c, const std::string& v) { member(c) = parse_bool(key, v); },
          [member](const RunConfig& c) { return std::string(read_member(member, c) ? "true" : "false"); }};
}

template <class Member>
Field text_field(const std::string& key, Member member) {
  return {key, [member](RunConfig& c, const std::string& v) { member(c) = v; },
          [member](const RunConfig& c) { return read_member(member, c); }};
}

const std::vector<Field>& registry() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(int_field<int>("grid.nx", [](RunConfig& c) -> int& { return c.grid.nx; }));
    f.push_back(int_field<int>("grid.ny", [](RunConfig& c) -> int& { return c.grid.ny; }));
    f.push_back(real_field("grid.lx", [](RunConfig& c) -> double& { return c.grid.lx; }));
    f.push_back(real_field("grid.ly", [](RunConfig& c) -> double& { return c.grid.ly; }));
    f.push_back(text_field("physics.model", [](RunConfig& c) -> std::string& { return c.physics.model; }));
    f.push_back(real_field("physics.c0", [](RunConfig& c) -> double& { return c.physics.c0; }));
    f.push_back(real_field("physics.alpha", [](RunConfig& c) -> double& { return c.physics.alpha; }));
    f.push_back(real_field("physics.eta0", [](RunConfig& c) -> double& { return c.physics.eta0; }));
    f.push_back(real_field("physics.L", [](RunConfig& c) -> double& { return c.physics.offset_L; }));
    f.push_back(real_field("solver.dt", [](RunConfig& c) -> double& { return c.solver.dt; }));
    f.push_back(real_field("solver.t_end", [](RunConfig& c) -> double& { return c.solver.t_end; }));
    f.push_back({"solver.frame_speed",
                 [](RunConfig& c, const std::string& v) {
                   if (v == "comoving") {
                     c.solver.comoving = true;
                   } else {
                     c.solver.comoving = false;
                     c.solver.frame_speed = v == "lab" ? 0.0 : parse_double("solver.frame_speed", v);
                   }
                 },
                 [](const RunConfig& c) {
                   return c.solver.comoving ? std::string("comoving") : format_double(c.solver.frame_speed);
                 }});
    f.push_back(int_field<int>("solver.snapshot_every", [](RunConfig& c) -> int& { return c.solver.snapshot_every; }));
    f.push_back(bool_field("solver.dealias", [](RunConfig& c) -> bool& { return c.solver.dealias; }));
    f.push_back(real_field("solver.blowup_factor", [](RunConfig& c) -> double& { return c.solver.blowup_factor; }));
    f.push_back(real_field("solver.sponge_width", [](RunConfig& c) -> double& { return c.solver.sponge_width; }));
    f.push_back(
        real_field("solver.sponge_strength", [](RunConfig& c) -> double& { return c.solver.sponge_strength; }));
    f.push_back({"perturbation.kind",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.perturbation.kind = parse_perturbation_kind(v);
                   } catch (const InvalidArgument& e) {
                     throw ConfigError("perturbation.kind", e.what());
                   }
                 },
                 [](const RunConfig& c) { return to_string(c.perturbation.kind); }});
    f.push_back(real_field("perturbation.amplitude", [](RunConfig& c) -> double& { return c.perturbation.amplitude; }));
    f.push_back(
        int_field<std::uint64_t>("perturbation.seed", [](RunConfig& c) -> std::uint64_t& { return c.perturbation.seed; }));
    f.push_back(real_field("perturbation.x_width", [](RunConfig& c) -> double& { return c.perturbation.x_width; }));
    f.push_back(real_field("perturbation.y_width", [](RunConfig& c) -> double& { return c.perturbation.y_width; }));
    f.push_back(real_field("perturbation.x_centre", [](RunConfig& c) -> double& { return c.perturbation.x_centre; }));
    f.push_back(real_field("decomposition.delta0", [](RunConfig& c) -> double& { return c.decomposition.delta0; }));
    f.push_back(
        real_field("decomposition.tolerance", [](RunConfig& c) -> double& { return c.decomposition.tolerance; }));
    f.push_back(int_field<int>("decomposition.max_iterations",
                               [](RunConfig& c) -> int& { return c.decomposition.max_iterations; }));
    f.push_back(real_field("decomposition.x_front", [](RunConfig& c) -> double& { return c.decomposition.x_front; }));
    f.push_back(real_field("decomposition.pairing_front",
                           [](RunConfig& c) -> double& { return c.decomposition.pairing_front; }));
    f.push_back(
        real_field("decomposition.seam_width", [](RunConfig& c) -> double& { return c.decomposition.seam_width; }));
    f.push_back(real_field("virial.eps", [](RunConfig& c) -> double& { return c.virial.eps; }));
    f.push_back(real_field("virial.c1", [](RunConfig& c) -> double& { return c.virial.c1; }));
    f.push_back(real_field("virial.x0", [](RunConfig& c) -> double& { return c.virial.x0; }));
    f.push_back(real_field("reduced.dt", [](RunConfig& c) -> double& { return c.reduced.dt; }));
    f.push_back(bool_field("reduced.nonlinear", [](RunConfig& c) -> bool& { return c.reduced.nonlinear; }));
    f.push_back(text_field("experiment.name", [](RunConfig& c) -> std::string& { return c.experiment.name; }));
    f.push_back(
        text_field("experiment.output_dir", [](RunConfig& c) -> std::string& { return c.experiment.output_dir; }));
    f.push_back(int_field<int>("run.threads", [](RunConfig& c) -> int& { return c.threads; }));
    return f;
  }();
  return fields;
}

const Field& field_for(const std::string& key) {
  for (const auto& f : registry())
    if (f.key == key) return f;
  throw ConfigError(key, "unknown configuration key");
}

bool power_of_two(int n) { return n >= 4 && (n & (n - 1)) == 0; }

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : registry()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  field_for(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return field_for(key).get(cfg); }

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : registry()) out.emplace_back(f.key, f.get(*this));
  return out;
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries()) os << k << '=' << v << '\n';
  return os.str();
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("", source + ":" + std::to_string(number) + ": expected key=value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.key, source + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

std::string env_name_for(const std::string& key) {
  std::string name = "KPLINE_";
  for (char ch : key) name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& lookup) {
  for (const auto& f : registry()) {
    const std::string name = env_name_for(f.key);
    if (const char* value = lookup(name.c_str())) {
      try {
        f.set(cfg, trim(value));
      } catch (const ConfigError& e) {
        throw ConfigError(f.key, "from " + name + ": " + e.what());
      }
    }
  }
}

void validate(const RunConfig& cfg) {
  const auto& g = cfg.grid;
  require(power_of_two(g.nx), "grid.nx", "must be a power of two (at least 4)");
  require(power_of_two(g.ny), "grid.ny", "must be a power of two (at least 4)");
  require(g.lx > 0, "grid.lx", "must be positive");
  require(g.ly > 0, "grid.ly", "must be positive");

  const auto& p = cfg.physics;
  if (p.model == "kp1" || p.model == "KP-I" || p.model == "kp-i")
    throw ConfigError("physics.model", "KP-I (sign-flipped transverse term) is not supported");
  require(p.model == "kp2", "physics.model", "must be kp2");
  require(p.c0 > 0, "physics.c0", "must be positive");
  require(p.alpha > 0 && p.alpha < 2, "physics.alpha", "must lie in (0, 2)");
  const Scaling sc = Scaling::for_amplitude(p.c0);
  const double eta_spacing_internal = 2.0 * M_PI / sc.y_in(g.ly);
  require(p.eta0 * sc.lambda * sc.lambda >= eta_spacing_internal * (1 - 1e-12), "physics.eta0",
          "below the y-wavenumber spacing 2 pi / ly; the resonant band would be empty");
  require(p.offset_L > 1, "physics.L", "must exceed the bump half-width 1");
  require(p.offset_L + 1 < 0.5 * g.lx, "physics.L", "correction bump does not fit in the box (need L + 1 < lx / 2)");

  const auto& s = cfg.solver;
  require(s.dt > 0, "solver.dt", "must be positive");
  require(s.t_end >= 0, "solver.t_end", "must be non-negative");
  require(s.snapshot_every >= 1, "solver.snapshot_every", "must be at least 1");
  require(s.blowup_factor > 1, "solver.blowup_factor", "must exceed 1");
  require(s.sponge_width >= 0, "solver.sponge_width", "must be non-negative");
  require(s.sponge_strength >= 0, "solver.sponge_strength", "must be non-negative");
  require(s.sponge_width < 0.5 * g.lx, "solver.sponge_width", "must be below lx / 2");

  const auto& pert = cfg.perturbation;
  require(pert.amplitude >= 0, "perturbation.amplitude", "must be non-negative");
  require(pert.x_width > 0, "perturbation.x_width", "must be positive");
  require(pert.y_width > 0, "perturbation.y_width", "must be positive");

  const auto& d = cfg.decomposition;
  require(d.delta0 > 0, "decomposition.delta0", "must be positive");
  require(d.tolerance > 0, "decomposition.tolerance", "must be positive");
  require(d.max_iterations >= 1, "decomposition.max_iterations", "must be at least 1");
  require(d.seam_width > 0 && 4 * d.seam_width < g.lx, "decomposition.seam_width", "must lie in (0, lx / 4)");
  require(d.pairing_front > 0, "decomposition.pairing_front", "must be positive");

  require(cfg.virial.eps > 0, "virial.eps", "must be positive");
  require(cfg.virial.c1 > 0, "virial.c1", "must be positive");
  require(cfg.reduced.dt > 0, "reduced.dt", "must be positive");
  require(!cfg.experiment.name.empty(), "experiment.name", "must not be empty");
  require(cfg.threads >= 1, "run.threads", "must be at least 1");
}

Scaling Scaling::for_amplitude(double c0) {
  if (!(c0 > 0)) throw ConfigError("physics.c0", "must be positive");
  return {std::sqrt(2.0 / c0)};
}

RunConfig to_internal(const RunConfig& physical) {
  validate(physical);
  const Scaling sc = Scaling::for_amplitude(physical.physics.c0);
  const double lam = sc.lambda, lam2 = lam * lam, lam3 = lam2 * lam;
  RunConfig c = physical;
  c.physics.c0 = 2.0;
  c.grid.lx /= lam;
  c.grid.ly /= lam2;
  c.physics.alpha *= lam;
  c.physics.eta0 *= lam2;
  c.physics.offset_L /= lam;
  c.solver.dt /= lam3;
  c.solver.t_end /= lam3;
  c.solver.frame_speed = physical.solver.comoving ? 4.0 : physical.solver.frame_speed * lam2;
  c.solver.comoving = false;
  c.solver.sponge_width /= lam;
  c.solver.sponge_strength *= lam3;
  c.perturbation.amplitude *= lam2;
  c.perturbation.x_width /= lam;
  c.perturbation.y_width /= lam2;
  c.perturbation.x_centre /= lam;
  c.decomposition.x_front /= lam;
  c.decomposition.pairing_front /= lam;
  c.decomposition.seam_width /= lam;
  c.virial.eps *= lam;
  c.virial.c1 *= lam2;
  c.virial.x0 /= lam;
  c.reduced.dt /= lam3;
  return c;
}

SolverConfig solver_config(const RunConfig& internal) {
  SolverConfig s;
  s.dt = internal.solver.dt;
  s.frame_speed = internal.solver.comoving ? 4.0 : internal.solver.frame_speed;
  s.dealias = internal.solver.dealias;
  s.blowup_factor = internal.solver.blowup_factor;
  s.sponge_width = internal.solver.sponge_width;
  s.sponge_strength = internal.solver.sponge_strength;
  return s;
}

DecompositionOptions decomposition_options(const RunConfig& internal) {
  DecompositionOptions o;
  o.eta0 = internal.physics.eta0;
  o.offset_L = internal.physics.offset_L;
  o.frame_speed = internal.solver.comoving ? 4.0 : internal.solver.frame_speed;
  o.tolerance = internal.decomposition.tolerance;
  o.max_iterations = internal.decomposition.max_iterations;
  o.alpha = internal.physics.alpha;
  o.delta0 = internal.decomposition.delta0;
  o.x_front = internal.decomposition.x_front;
  o.pairing_front = internal.decomposition.pairing_front;
  o.seam_width = internal.decomposition.seam_width;
  return o;
}

Grid2D make_grid(const RunConfig& internal) {
  return Grid2D(internal.grid.nx, internal.grid.ny, internal.grid.lx, internal.grid.ly);
}

}  // namespace kpline

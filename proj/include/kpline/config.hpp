#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpline/decomp.hpp"
#include "kpline/initial_data.hpp"
#include "kpline/kp2.hpp"

namespace kpline {

// A configuration value that is missing, malformed or out of range. `key` names
// the offending field (dotted form) when there is one.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& key_name, const std::string& message)
      : std::runtime_error(key_name.empty() ? message : key_name + ": " + message), key(key_name) {}
  std::string key;
};

struct GridSection {
  int nx = 512;
  int ny = 32;
  double lx = 128.0;
  double ly = 64.0;
};

struct PhysicsSection {
  std::string model = "kp2";
  double c0 = 2.0;
  double alpha = 0.5;
  double eta0 = 0.25;
  double offset_L = 20.0;
};

struct SolverSection {
  double dt = 0.01;
  double t_end = 10.0;
  // Frame speed in physical units; "comoving" (the default) means 2 c0.
  bool comoving = true;
  double frame_speed = 4.0;
  int snapshot_every = 100;
  bool dealias = false;
  double blowup_factor = 10.0;
  double sponge_width = 24.0;
  double sponge_strength = 50.0;
};

struct DecompositionSection {
  double delta0 = 0.3;
  double tolerance = 1e-10;
  int max_iterations = 50;
  double x_front = 5.0;
  double pairing_front = 20.0;
  double seam_width = 8.0;
};

struct VirialSection {
  double eps = 0.05;
  double c1 = 2.0;
  double x0 = 0.0;
};

struct ReducedSection {
  double dt = 0.01;
  bool nonlinear = true;
};

struct ExperimentSection {
  std::string name = "run";
  std::string output_dir = "runs/run";
};

struct RunConfig {
  GridSection grid;
  PhysicsSection physics;
  SolverSection solver;
  PerturbationSpec perturbation;
  DecompositionSection decomposition;
  VirialSection virial;
  ReducedSection reduced;
  ExperimentSection experiment;
  int threads = 1;

  // Every key with its current value, in registry order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;
};

// Keys understood by set_config_value, in the order used by to_text.
const std::vector<std::string>& config_keys();
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

// key=value lines with '#' comments; later lines override earlier ones.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config_file(const std::string& path);

// KPLINE_<KEY> with dots replaced by underscores and letters upper-cased, e.g.
// KPLINE_GRID_NX for grid.nx. `lookup` returns nullptr for unset variables.
std::string env_name_for(const std::string& key);
void apply_env_overrides(RunConfig& cfg, const std::function<const char*(const char*)>& lookup);

// Throws ConfigError naming the first invalid field.
void validate(const RunConfig& cfg);

// Scaling u -> lam^2 u(lam^3 t, lam x, lam^2 y) with lam = sqrt(2 / c0) maps a
// soliton of amplitude c0 to amplitude 2. Internal runs always use c0 = 2.
struct Scaling {
  double lambda = 1.0;

  static Scaling for_amplitude(double c0);
  double time_out(double t) const { return t * lambda * lambda * lambda; }
  double x_out(double x) const { return x * lambda; }
  double y_out(double y) const { return y * lambda * lambda; }
  double field_out(double u) const { return u / (lambda * lambda); }
  double field_in(double u) const { return u * lambda * lambda; }
  double time_in(double t) const { return t / (lambda * lambda * lambda); }
  double x_in(double x) const { return x / lambda; }
  double y_in(double y) const { return y / (lambda * lambda); }
};

// The validated configuration rewritten in internal (c0 = 2) units.
RunConfig to_internal(const RunConfig& physical);

// Module-level settings derived from an internal configuration.
SolverConfig solver_config(const RunConfig& internal);
DecompositionOptions decomposition_options(const RunConfig& internal);
Grid2D make_grid(const RunConfig& internal);

}  // namespace kpline

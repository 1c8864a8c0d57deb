#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kpline/config.hpp"
#include "kpline/io.hpp"
#include "kpline/reduced.hpp"

namespace kpline {

// A run stopped by the solver's blow-up or finiteness guard. Snapshots written
// before the halt are kept, together with the last good state.
struct RunHalted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string code_version();
// Deterministic identifier derived from the experiment name and configuration.
std::string run_id_for(const RunConfig& physical);

json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const json& j);

// ---- simulate -------------------------------------------------------------
//
// Directory layout:
//   manifest.json            configuration, status, append-only snapshot index
//   checkpoint.bin           spectra at the newest snapshot (resume point)
//   snapshots/u_NNNNNN.*     total field (and v1_NNNNNN.* for the companion run)
//   diagnostics.csv          t,l2,l3,min,max of u

struct SimulateOptions {
  bool resume = false;
  // Also evolve the free companion run started from the initial perturbation.
  bool companion = false;
  // Test hook: stop (status "interrupted") after this many new snapshots.
  long stop_after_snapshots = -1;
};

struct SnapshotEntry {
  long index = 0;
  long step = 0;
  double t = 0.0;  // output units
  bool has_companion = false;
};

struct SimulateResult {
  std::string status;  // complete, interrupted
  long step = 0;
  long snapshots = 0;
};

SimulateResult simulate(const RunConfig& physical, const fs::path& dir, const SimulateOptions& options = {});
std::vector<SnapshotEntry> list_snapshots(const json& manifest);
fs::path snapshot_stem(const fs::path& run_dir, const std::string& field, long index);

// ---- extract --------------------------------------------------------------
//
// Per frame: mod_NNNNNN.csv (y,c,x,x_y,b) and v2_NNNNNN.* (remainder in the
// crest frame); summary.json collects residuals and norms.

struct ExtractSummary {
  long frames = 0;
  bool aborted = false;
  std::string reason;
};
ExtractSummary extract(const fs::path& sim_dir, const fs::path& out_dir);

// ---- reduced --------------------------------------------------------------

// Runs the reduced crest model from `start` (internal units) and writes
// crest_NNNNNN.csv (y,b,x_y,c) for each requested internal time plus index.csv.
void run_reduced(const RunConfig& physical, const ModulationState& start, const std::vector<double>& times,
                 const fs::path& out_dir);
// Seeds from an extraction directory (its first frame and its time stamps).
void run_reduced_from_extract(const fs::path& extract_dir, const fs::path& out_dir);
// Seeds from the configured initial crest profiles, with output every
// snapshot interval up to t_end.
void run_reduced_from_config(const RunConfig& physical, const fs::path& out_dir);

// ---- compare / diagnose ---------------------------------------------------

std::vector<CompareRow> compare_dirs(const fs::path& extract_dir, const fs::path& reduced_dir, const fs::path& out_csv);

// Columns t,l2,l3,xnorm,wnorm,virial,virial_dissip,Q,Qcompanion. Norms are in
// internal units; t is in output units.
DiagnosticsSeries diagnose(const fs::path& sim_dir, const fs::path& extract_dir, const fs::path& out_csv);

// ---- pipeline -------------------------------------------------------------

struct PipelineOptions {
  bool resume = false;
  long stop_after_snapshots = -1;
};

// Runs simulate (with companion), extract, reduced, compare and diagnose
// under `root` and writes root/report.json. Stage failures are recorded in the
// report; RunHalted and ConfigError propagate after the report is written.
json run_pipeline(const RunConfig& physical, const fs::path& root, const PipelineOptions& options = {});
json build_report(const fs::path& root);

// Repeats the pipeline for each amplitude under root/eps_<value>.
json run_vary(const RunConfig& physical, const fs::path& root, const std::vector<double>& amplitudes,
              const PipelineOptions& options = {});

// ---- spectrum -------------------------------------------------------------

// eta, Re lambda, Im lambda and the weighted eigen-residual on `count` evenly
// spaced wavenumbers in [eta_min, eta_max].
void write_spectrum_csv(const fs::path& path, double eta_min, double eta_max, int count, double alpha);

}  // namespace kpline

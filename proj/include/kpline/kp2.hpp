#pragma once

#include <functional>
#include <optional>
#include <stdexcept>

#include "kpline/etdrk4.hpp"
#include "kpline/grid.hpp"

namespace kpline {

// Symbol of the linear KP-II part in a frame moving with speed `frame_speed`:
// i (xi^3 + s xi - 3 eta^2 / xi), with the xi = 0 row mapped to zero.
cplx linear_symbol(double xi, double eta, double frame_speed);

struct SolverConfig {
  double dt = 0.01;
  double frame_speed = 4.0;
  bool dealias = true;
  double blowup_factor = 10.0;  // halt when max|u| exceeds this multiple of its initial value
  // Optional absorbing layer next to the x-seam: damping rate `sponge_strength`
  // ramping up over the last `sponge_width` units on either side of the seam.
  // The layer absorbs line mass as well, so the per-line mean is conserved only
  // while nothing reaches it (and exactly when the layer is disabled).
  double sponge_width = 0.0;
  double sponge_strength = 0.0;

  void validate() const;
};

// Spectral state plus the integer step counter; time is step * dt so that a
// resumed run reproduces the uninterrupted one exactly.
struct EvolutionState {
  Spectrum2D spectrum;
  long step = 0;
};

struct NumericHalt : std::runtime_error {
  NumericHalt(const std::string& what, EvolutionState last_good)
      : std::runtime_error(what), state(std::move(last_good)) {}
  EvolutionState state;
};

class KpStepper {
 public:
  KpStepper(const Grid2D& grid, const SolverConfig& config);

  const Grid2D& grid() const { return grid_; }
  const SolverConfig& config() const { return config_; }

  // One ETDRK4 step. Throws NumericHalt on non-finite values or blow-up.
  void step(EvolutionState& state);
  // Reference amplitude for the blow-up guard (max|u| of the initial data).
  void set_reference_amplitude(double amp) { reference_amp_ = amp; }

  Eigen::ArrayXXcd nonlinear(const Eigen::ArrayXXcd& v) const;

 private:
  Grid2D grid_;
  SolverConfig config_;
  Etdrk4 scheme_;
  Eigen::ArrayXXcd product_multiplier_;  // -3 i xi / (nx ny), dealiased
  Eigen::ArrayXXd sponge_;               // empty when disabled
  double reference_amp_ = 0.0;
  std::optional<EvolutionState> last_good_;  // state entering the previous step
  mutable double last_max_ = 0.0;
  mutable Eigen::ArrayXXd work_;
};

struct RunRecord {
  double t, l2, l3, min, max;
};

// Receives the state every `snapshot_every` steps (and at the start).
using SnapshotCallback = std::function<void(const EvolutionState&, const RealField2D&, const RunRecord&)>;

RunRecord record_for(const RealField2D& u, double t);

// Evolves from `state` until step * dt reaches t_end (rounded to whole steps).
// The callback fires at state.step if `emit_initial`, then every snapshot_every
// steps and at the final step.
EvolutionState evolve(KpStepper& stepper, EvolutionState state, double t_end, int snapshot_every,
                      const SnapshotCallback& on_snapshot, bool emit_initial = true);

long steps_for(double t_end, double dt);

}  // namespace kpline

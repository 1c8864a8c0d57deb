#include "kpline/kp2.hpp"

#include <cmath>
#include <string>

namespace kpline {

cplx linear_symbol(double xi, double eta, double frame_speed) {
  if (xi == 0.0) return cplx(0.0);
  return cplx(0.0, xi * xi * xi + frame_speed * xi - 3.0 * eta * eta / xi);
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("solver.dt must be positive");
  if (!std::isfinite(frame_speed)) throw InvalidArgument("solver.frame_speed must be finite");
  if (!(blowup_factor > 1.0)) throw InvalidArgument("solver.blowup_factor must exceed 1");
  if (sponge_width < 0.0 || sponge_strength < 0.0)
    throw InvalidArgument("solver.sponge_width and solver.sponge_strength must be non-negative");
}

namespace {

Eigen::ArrayXXcd symbol_array(const Grid2D& g, double speed) {
  Eigen::ArrayXXcd sym(g.nxh(), g.ny());
  for (int m = 0; m < g.ny(); ++m)
    for (int k = 0; k < g.nxh(); ++k) sym(k, m) = linear_symbol(g.xi()(k), g.eta()(m), speed);
  return sym;
}

}  // namespace

KpStepper::KpStepper(const Grid2D& grid, const SolverConfig& config)
    : grid_(grid), config_((config.validate(), config)), scheme_(symbol_array(grid, config.frame_speed), config.dt) {
  const double norm = 1.0 / (static_cast<double>(grid.nx()) * grid.ny());
  product_multiplier_.resize(grid.nxh(), grid.ny());
  const auto mask = dealias_mask(grid);
  for (int m = 0; m < grid.ny(); ++m)
    for (int k = 0; k < grid.nxh(); ++k) {
      const bool keep = !config.dealias || mask(k, m);
      product_multiplier_(k, m) = keep ? cplx(0.0, -3.0 * grid.xi()(k) * norm) : cplx(0.0);
    }
  product_multiplier_.row(grid.nx() / 2).setZero();

  if (config.sponge_width > 0.0 && config.sponge_strength > 0.0) {
    if (config.sponge_width >= 0.5 * grid.lx()) throw InvalidArgument("solver.sponge_width must be below lx/2");
    sponge_ = Eigen::ArrayXXd::Zero(grid.nx(), grid.ny());
    const double inner = 0.5 * grid.lx() - config.sponge_width;
    for (int i = 0; i < grid.nx(); ++i) {
      const double d = std::abs(grid.x(i)) - inner;
      if (d <= 0.0) continue;
      const double s = std::sin(0.5 * M_PI * d / config.sponge_width);
      sponge_.row(i).setConstant(config.sponge_strength * s * s);
    }
  }
  work_.resize(grid.nx(), grid.ny());
}

Eigen::ArrayXXcd KpStepper::nonlinear(const Eigen::ArrayXXcd& v) const {
  grid_.plan().inverse(v.data(), work_.data());
  last_max_ = work_.abs().maxCoeff();
  Eigen::ArrayXXcd out(grid_.nxh(), grid_.ny());
  if (sponge_.size() == 0) {
    work_ = work_.square();
    grid_.plan().forward(work_.data(), out.data());
    out *= product_multiplier_;
    return out;
  }
  Eigen::ArrayXXd damped = sponge_ * work_;
  work_ = work_.square();
  grid_.plan().forward(work_.data(), out.data());
  out *= product_multiplier_;
  Eigen::ArrayXXcd damp_hat(grid_.nxh(), grid_.ny());
  grid_.plan().forward(damped.data(), damp_hat.data());
  out -= damp_hat / (static_cast<double>(grid_.nx()) * grid_.ny());
  return out;
}

void KpStepper::step(EvolutionState& state) {
  if (!state.spectrum.grid.same_shape(grid_)) throw InvalidArgument("kp2: state grid differs from stepper grid");
  EvolutionState before{state.spectrum, state.step};
  bool first = true;
  double start_max = 0.0;
  scheme_.step(state.spectrum.coeffs, [&](const Eigen::ArrayXXcd& v) {
    Eigen::ArrayXXcd r = nonlinear(v);
    if (first) {
      start_max = last_max_;
      first = false;
    }
    return r;
  });
  ++state.step;
  if (!std::isfinite(start_max) || !state.spectrum.coeffs.allFinite())
    throw NumericHalt("kp2: non-finite values at step " + std::to_string(state.step), before);
  if (reference_amp_ > 0.0 && start_max > config_.blowup_factor * reference_amp_) {
    // The state entering this step is the one that tripped the guard.
    EvolutionState good = last_good_ && last_good_->step == before.step - 1 ? *last_good_ : before;
    throw NumericHalt("kp2: blow-up guard tripped at step " + std::to_string(before.step) + " (max|u| = " +
                          std::to_string(start_max) + ")",
                      std::move(good));
  }
  last_good_ = std::move(before);
}

RunRecord record_for(const RealField2D& u, double t) {
  return {t, l2_norm(u), lp_norm(u, 3.0), u.values.minCoeff(), u.values.maxCoeff()};
}

long steps_for(double t_end, double dt) { return std::lround(t_end / dt); }

EvolutionState evolve(KpStepper& stepper, EvolutionState state, double t_end, int snapshot_every,
                      const SnapshotCallback& on_snapshot, bool emit_initial) {
  if (snapshot_every < 1) throw InvalidArgument("solver.snapshot_every must be >= 1");
  const double dt = stepper.config().dt;
  const long last = steps_for(t_end, dt);
  auto emit = [&](const EvolutionState& s) {
    if (!on_snapshot) return;
    const RealField2D u = inverse(s.spectrum);
    const RunRecord rec = record_for(u, s.step * dt);
    if (!u.values.allFinite()) throw NumericHalt("kp2: non-finite snapshot", s);
    on_snapshot(s, u, rec);
  };
  if (emit_initial) emit(state);
  while (state.step < last) {
    stepper.step(state);
    if (state.step % snapshot_every == 0 || state.step == last) emit(state);
  }
  return state;
}

}  // namespace kpline

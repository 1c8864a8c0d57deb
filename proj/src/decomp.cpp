#include "kpline/decomp.hpp"

#include <cmath>
#include <string>

#include "kpline/diagnostics.hpp"
#include "kpline/resonant.hpp"
#include "kpline/soliton.hpp"

namespace kpline {

namespace {

// C-infinity step: 0 for d <= 0, 1 for d >= 1.
double smooth_step(double d) {
  if (d >= 1.0) return 1.0;
  if (d <= 0.0) return 0.0;
  const auto bump = [](double s) { return std::exp(-1.0 / s); };
  return bump(d) / (bump(d) + bump(1.0 - d));
}

// Pairing window in the crest frame: switches off before the periodic seam
// behind the crest and beyond `front` ahead of it, each over `width`.
double pairing_window(double z, double half_box, double front, double width) {
  const double back = smooth_step((z + half_box - width) / width);
  const double ahead = smooth_step((front + width - z) / width);
  return back * ahead;
}

}  // namespace

YBand::YBand(const Grid2D& grid, double eta0) : ny_(grid.ny()), dy_(grid.dy()), eta0_(eta0), ys_(grid.ys()) {
  if (!(eta0 >= grid.eta_spacing() * (1.0 - 1e-12)))
    throw InvalidArgument("band: eta0 below the grid eta-spacing resolves no transverse mode");
  const double step = grid.eta_spacing();
  for (int m = 0; m < ny_ / 2 && m * step <= eta0 * (1.0 + 1e-12); ++m) etas_.push_back(m * step);
  basis_.push_back(Eigen::ArrayXd::Ones(ny_));
  for (int m = 1; m <= highest(); ++m) {
    basis_.push_back(2.0 * (etas_[m] * ys_).cos());
    basis_.push_back(-2.0 * (etas_[m] * ys_).sin());
  }
}

Eigen::ArrayXd YBand::synthesize(const Eigen::VectorXd& coords) const {
  if (coords.size() != dimension()) throw InvalidArgument("band: coordinate vector has the wrong length");
  Eigen::ArrayXd f = Eigen::ArrayXd::Zero(ny_);
  for (int l = 0; l < dimension(); ++l) f += coords(l) * basis_[l];
  return f;
}

Eigen::VectorXd YBand::analyze(const Eigen::ArrayXd& f) const {
  if (f.size() != ny_) throw InvalidArgument("band: profile has the wrong length");
  Eigen::VectorXd out(dimension());
  out(0) = f.mean();
  for (int m = 1; m <= highest(); ++m) {
    const Eigen::ArrayXd ph = etas_[m] * ys_;
    out(2 * m - 1) = (f * ph.cos()).mean();
    out(2 * m) = -(f * ph.sin()).mean();
  }
  return out;
}

double YBand::leakage(const Eigen::ArrayXd& f) const {
  const double total = std::sqrt(f.square().sum());
  if (total == 0.0) return 0.0;
  return std::sqrt((f - project(f)).square().sum()) / total;
}

Eigen::ArrayXd YBand::derivative(const Eigen::ArrayXd& f, int order) const {
  const Eigen::VectorXd a = analyze(f);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(ny_);
  for (int m = 1; m <= highest(); ++m) {
    const cplx coeff(a(2 * m - 1), a(2 * m));
    const cplx factor = std::pow(cplx(0.0, etas_[m]), order) * coeff;
    // 2 Re(factor e^{i eta y})
    out += 2.0 * (factor.real() * (etas_[m] * ys_).cos() - factor.imag() * (etas_[m] * ys_).sin());
  }
  return out;
}

Decomposer::Decomposer(const Grid2D& grid, const DecompositionOptions& options)
    : grid_(grid), options_(options), band_(grid, options.eta0) {
  if (options.tolerance <= 0 || options.max_iterations < 1 || options.max_halvings < 0)
    throw InvalidArgument("decompose: invalid solver options");
  if (!(options.seam_width > 0.0) || 4.0 * options.seam_width >= grid.lx())
    throw InvalidArgument("decompose: seam_width must be positive and below lx/4");
}

double Decomposer::reference_position(double t) const {
  return wrap_periodic((options_.soliton_speed - options_.frame_speed) * t, grid_.lx());
}

void Decomposer::line_pairings(const RealField2D& base, int j, double amplitude, double gamma, double t,
                               Eigen::ArrayXcd& h1, Eigen::ArrayXcd& h2) const {
  if (!(amplitude > 0.0)) throw DecompositionError("decompose: local amplitude c(y) must stay positive", NAN);
  const int modes = band_.highest() + 1;
  h1.setZero(modes);
  h2.setZero(modes);
  const double pos = reference_position(t) + gamma;
  const double trail = options_.offset_L + 3.0 * t;
  const double front = std::min(options_.pairing_front, 0.5 * grid_.lx() - 2.0 * options_.seam_width);
  std::vector<AdjointModes> adj;
  adj.reserve(modes);
  for (int m = 0; m < modes; ++m) adj.emplace_back(band_.etas()[m]);
  for (int i = 0; i < grid_.nx(); ++i) {
    const double z = wrap_periodic(grid_.x(i) - pos, grid_.lx());
    const double zb = wrap_periodic(z + trail, grid_.lx());
    const double window = pairing_window(z, 0.5 * grid_.lx(), front, options_.seam_width);
    if (window == 0.0) continue;
    const double r =
        window * (base.values(i, j) - soliton_profile(z, amplitude) + mass_correction(zb, amplitude, 0.0));
    if (r == 0.0) continue;
    for (int m = 0; m < modes; ++m) {
      const ModePair g = adj[m].scaled(z, amplitude);
      h1(m) += r * g.first;
      h2(m) += r * g.second;
    }
  }
  h1 *= grid_.dx();
  h2 *= grid_.dx();
}

Decomposer::Functionals Decomposer::eval_F(const RealField2D& base, const Eigen::ArrayXd& amplitude,
                                           const Eigen::ArrayXd& gamma, double t) const {
  const int modes = band_.highest() + 1;
  Functionals out{Eigen::ArrayXcd::Zero(modes), Eigen::ArrayXcd::Zero(modes)};
  Eigen::ArrayXcd h1, h2;
  for (int j = 0; j < grid_.ny(); ++j) {
    line_pairings(base, j, amplitude(j), gamma(j), t, h1, h2);
    for (int m = 0; m < modes; ++m) {
      const cplx phase = std::polar(grid_.dy(), -band_.etas()[m] * grid_.y(j));
      out.f1(m) += phase * h1(m);
      out.f2(m) += phase * h2(m);
    }
  }
  return out;
}

namespace {

// [Re F(0), Re F(1), Im F(1), ...] for one functional.
void flatten(const Eigen::ArrayXcd& f, Eigen::Ref<Eigen::VectorXd> out) {
  out(0) = f(0).real();
  for (Eigen::Index m = 1; m < f.size(); ++m) {
    out(2 * m - 1) = f(m).real();
    out(2 * m) = f(m).imag();
  }
}

}  // namespace

Eigen::VectorXd Decomposer::residual(const RealField2D& base, const Eigen::VectorXd& params, double t) const {
  const int d = band_.dimension();
  const Eigen::ArrayXd amplitude = 2.0 + band_.synthesize(params.head(d));
  const Eigen::ArrayXd gamma = band_.synthesize(params.tail(d));
  const Functionals f = eval_F(base, amplitude, gamma, t);
  Eigen::VectorXd out(2 * d);
  flatten(f.f1, out.head(d));
  flatten(f.f2, out.tail(d));
  return out;
}

Eigen::MatrixXd Decomposer::jacobian(const RealField2D& base, const Eigen::VectorXd& params, double t) const {
  const int d = band_.dimension();
  const int modes = band_.highest() + 1;
  const Eigen::ArrayXd amplitude = 2.0 + band_.synthesize(params.head(d));
  const Eigen::ArrayXd gamma = band_.synthesize(params.tail(d));
  const double h = options_.fd_step;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  Eigen::ArrayXcd p1, p2, m1, m2;
  Eigen::VectorXd col(d);
  for (int j = 0; j < grid_.ny(); ++j) {
    // Per-line sensitivities of h_k with respect to c(y_j) and gamma(y_j).
    line_pairings(base, j, amplitude(j) + h, gamma(j), t, p1, p2);
    line_pairings(base, j, amplitude(j) - h, gamma(j), t, m1, m2);
    const Eigen::ArrayXcd dc1 = (p1 - m1) / (2 * h), dc2 = (p2 - m2) / (2 * h);
    line_pairings(base, j, amplitude(j), gamma(j) + h, t, p1, p2);
    line_pairings(base, j, amplitude(j), gamma(j) - h, t, m1, m2);
    const Eigen::ArrayXcd dg1 = (p1 - m1) / (2 * h), dg2 = (p2 - m2) / (2 * h);

    Eigen::ArrayXcd e1c(modes), e2c(modes), e1g(modes), e2g(modes);
    for (int m = 0; m < modes; ++m) {
      const cplx phase = std::polar(grid_.dy(), -band_.etas()[m] * grid_.y(j));
      e1c(m) = phase * dc1(m);
      e2c(m) = phase * dc2(m);
      e1g(m) = phase * dg1(m);
      e2g(m) = phase * dg2(m);
    }
    Eigen::VectorXd r1c(d), r2c(d), r1g(d), r2g(d);
    flatten(e1c, r1c);
    flatten(e2c, r2c);
    flatten(e1g, r1g);
    flatten(e2g, r2g);
    for (int l = 0; l < d; ++l) {
      const double b = band_.basis(l)(j);
      jac.block(0, l, d, 1) += b * r1c;
      jac.block(d, l, d, 1) += b * r2c;
      jac.block(0, d + l, d, 1) += b * r1g;
      jac.block(d, d + l, d, 1) += b * r2g;
    }
  }
  return jac;
}

Eigen::VectorXd Decomposer::pack(const ModulationState& mod) const {
  const int d = band_.dimension();
  Eigen::VectorXd p(2 * d);
  p.head(d) = band_.analyze(mod.c - 2.0);
  p.tail(d) = band_.analyze(mod.x - options_.soliton_speed * mod.t);
  return p;
}

ModulationState Decomposer::unpack(const Eigen::VectorXd& params, double t) const {
  const int d = band_.dimension();
  return {2.0 + band_.synthesize(params.head(d)), options_.soliton_speed * t + band_.synthesize(params.tail(d)), t};
}

RealField2D Decomposer::remainder(const RealField2D& base, const Eigen::ArrayXd& amplitude,
                                  const Eigen::ArrayXd& gamma, double t) const {
  RealField2D r = base;
  const double trail = options_.offset_L + 3.0 * t;
  for (int j = 0; j < grid_.ny(); ++j) {
    const double pos = reference_position(t) + gamma(j);
    for (int i = 0; i < grid_.nx(); ++i) {
      const double z = wrap_periodic(grid_.x(i) - pos, grid_.lx());
      r.values(i, j) += -soliton_profile(z, amplitude(j)) + mass_correction(wrap_periodic(z + trail, grid_.lx()),
                                                                             amplitude(j), 0.0);
    }
  }
  return r;
}

SplitState Decomposer::decompose(const RealField2D& u, double t, const RealField2D* v1,
                                  const ModulationState& guess) const {
  if (!u.grid.same_shape(grid_)) throw InvalidArgument("decompose: field grid mismatch");
  RealField2D base = u;
  if (v1) {
    if (!v1->grid.same_shape(grid_)) throw InvalidArgument("decompose: v1 grid mismatch");
    base.values -= v1->values;
  }
  ModulationState start = guess;
  start.t = t;
  if (start.c.size() != grid_.ny() || start.x.size() != grid_.ny())
    throw InvalidArgument("decompose: guess profiles must have ny entries");
  Eigen::VectorXd p = pack(start);

  // Smallness of u_tilde = u - v1 - (ansatz at the warm start) in the weighted norm.
  const double ref = reference_position(t);
  const int d = band_.dimension();
  const Eigen::ArrayXd start_gamma = band_.synthesize(p.tail(d));
  if ((start.c <= 0.0).any()) throw InvalidArgument("decompose: guess amplitude must be positive");
  const RealField2D utilde = remainder(base, start.c, start_gamma, t);
  const double small = norm_X(utilde, options_.alpha, ref + start_gamma.mean(), options_.x_front);
  const double per_length = small / std::sqrt(grid_.ly());
  if (!(per_length <= options_.delta0))
    throw DecompositionError("decompose: ||u_tilde||_X / sqrt(ly) = " + std::to_string(per_length) + " exceeds delta0 = " +
                                 std::to_string(options_.delta0),
                             NAN);

  Eigen::VectorXd f = residual(base, p, t);
  double fnorm = f.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (fnorm >= options_.tolerance) {
    if (iter >= options_.max_iterations)
      throw DecompositionError("decompose: Newton did not converge in " + std::to_string(iter) +
                                   " iterations (residual " + std::to_string(fnorm) + ")",
                               fnorm);
    const Eigen::MatrixXd jac = jacobian(base, p, t);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (cond > options_.max_condition)
      throw DecompositionError("decompose: Jacobian condition number " + std::to_string(cond) + " exceeds limit",
                               fnorm);
    const Eigen::VectorXd step = svd.solve(-f);
    double scale = 1.0;
    Eigen::VectorXd trial = p + step;
    Eigen::VectorXd ftrial;
    bool accepted = false;
    for (int halving = 0; halving <= options_.max_halvings; ++halving) {
      try {
        ftrial = residual(base, trial, t);
        if (ftrial.lpNorm<Eigen::Infinity>() < fnorm) {
          accepted = true;
          break;
        }
      } catch (const DecompositionError&) {
        // amplitude left the admissible set; shorten the step
      }
      scale *= 0.5;
      trial = p + scale * step;
    }
    ++iter;
    if (!accepted) {
      // Accept the shortest step anyway if it is still admissible; otherwise give up.
      try {
        ftrial = residual(base, trial, t);
      } catch (const DecompositionError&) {
        throw DecompositionError("decompose: damped step left the admissible set", fnorm);
      }
    }
    p = trial;
    f = ftrial;
    fnorm = f.lpNorm<Eigen::Infinity>();
  }

  SplitState out{RealField2D(grid_), unpack(p, t), fnorm, iter, small};
  const Eigen::ArrayXd gamma = band_.synthesize(p.tail(d));
  const RealField2D r = remainder(base, out.mod.c, gamma, t);
  out.v2 = shift_lines(r, -(gamma + ref));
  return out;
}

TrackResult track(const Decomposer& dec, const FrameSource& next, const TrackSink& sink, bool keep_states) {
  TrackResult result;
  ModulationState guess{Eigen::ArrayXd::Constant(dec.grid().ny(), 2.0), Eigen::ArrayXd::Zero(dec.grid().ny()), 0.0};
  bool first = true;
  while (auto frame = next()) {
    if (!first) {
      // Carry the crest offset, not the lab phase, across frames.
      guess.x += dec.options().soliton_speed * (frame->t - guess.t);
    }
    guess.t = frame->t;
    try {
      SplitState s = dec.decompose(frame->u, frame->t, frame->v1 ? &*frame->v1 : nullptr, guess);
      guess = s.mod;
      if (sink) sink(s);
      if (keep_states) result.states.push_back(std::move(s));
    } catch (const DecompositionError& e) {
      result.aborted = true;
      result.reason = "t=" + std::to_string(frame->t) + ": " + e.what();
      break;
    }
    first = false;
  }
  return result;
}

}  // namespace kpline

#include "kpline/resonant.hpp"

#include <cmath>
#include <string>

#include "kpline/etdrk4.hpp"
#include "kpline/kp2.hpp"
#include "kpline/soliton.hpp"

namespace kpline {

namespace {

constexpr cplx I(0.0, 1.0);

double sinc(double u) {
  if (std::abs(u) < 1e-4) return 1.0 - u * u / 6.0;
  return std::sin(u) / u;
}

double atan_over(double eta) {
  if (std::abs(eta) < 1e-4) return 1.0 - eta * eta / 3.0;
  return std::atan(eta) / eta;
}

// tanh x, 1 - tanh x, 1 + tanh x and sech^2 x without cancellation.
struct Hyperbolic {
  double t, one_minus, one_plus, sech2;
  explicit Hyperbolic(double x) {
    const double e = std::exp(-2.0 * std::abs(x));
    const double d = 1.0 + e;
    if (x >= 0) {
      one_minus = 2.0 * e / d;
      one_plus = 2.0 / d;
    } else {
      one_minus = 2.0 / d;
      one_plus = 2.0 * e / d;
    }
    t = one_plus - 1.0;
    if (x >= 0) t = 1.0 - one_minus;
    sech2 = 4.0 * e / (d * d);
  }
};

// r = 1 / (beta + 1), so that beta - 1 = i eta r without cancellation.
cplx shifted_inverse(double eta) { return 1.0 / (resonant_beta(eta) + 1.0); }

double soliton_c(double x, double c) { return soliton_profile(x, c); }

}  // namespace

cplx resonant_beta(double eta) { return std::sqrt(cplx(1.0, eta)); }

cplx resonant_lambda(double eta) { return 4.0 * I * eta * resonant_beta(eta); }

cplx mode_g(double x, double eta) {
  if (eta == 0.0) throw InvalidArgument("mode_g: eta = 0 has no complex mode; use mode_real");
  const cplx beta = resonant_beta(eta);
  const cplx kappa = I * eta * shifted_inverse(eta);
  const Hyperbolic h(x);
  const cplx curvature = 2.0 * h.t * h.sech2 + kappa * h.one_minus * (2.0 * h.one_plus + kappa);
  return -I / (2.0 * eta * beta) * std::exp(-kappa * x) * curvature;
}

cplx mode_gstar(double x, double eta) {
  const cplx delta = -I * eta * std::conj(shifted_inverse(eta));
  const Hyperbolic h(x);
  return std::exp(delta * x) * (h.sech2 + delta * h.one_plus);
}

ModePair mode_real(double x, double eta) {
  const cplx r = shifted_inverse(eta);
  const cplx kappa = I * eta * r;
  const Hyperbolic h(x);
  const cplx q = h.one_minus * (2.0 * h.one_plus + kappa);
  const cplx b = 2.0 * h.t * h.sech2 + kappa * q;
  const cplx log_a = -kappa * x - std::log(resonant_beta(eta));
  const cplx a = std::exp(log_a);
  // Im(a)/eta and Im(b)/eta in closed form.
  const double phase = -x * r.real() - 0.5 * atan_over(eta);
  const double im_a = std::exp(log_a.real()) * phase * sinc(eta * phase);
  const double im_b = (r * q).real();
  const cplx w = a * b;
  return {a.real() * im_b + im_a * b.real(), w.real()};
}

AdjointModes::AdjointModes(double eta) : eta_(eta) {
  rbar_ = std::conj(shifted_inverse(eta));
  delta_ = -I * eta * rbar_;
}

ModePair AdjointModes::operator()(double x) const {
  const Hyperbolic h(x);
  const cplx e = std::exp(delta_ * x);
  const cplx gs = e * (h.sech2 + delta_ * h.one_plus);
  // -Im(g*)/eta split as Im(e)/eta and Im(e delta)/eta = -Re(e rbar).
  const double phase = -x * rbar_.real();
  const double im_e = std::exp(delta_.real() * x) * phase * sinc(eta_ * phase);
  const double im_e_delta = -(e * rbar_).real();
  return {gs.real(), -(h.sech2 * im_e + h.one_plus * im_e_delta)};
}

ModePair AdjointModes::scaled(double z, double c) const {
  const ModePair m = (*this)(std::sqrt(0.5 * c) * z);
  return {c * m.first, 0.5 * c * m.second};
}

ModePair adjoint_real(double x, double eta) { return AdjointModes(eta)(x); }

double adjoint_scaled(double z, double eta, double c, int k) {
  if (!(c > 0.0)) throw InvalidArgument("adjoint_scaled: c must be positive");
  if (k != 1 && k != 2) throw InvalidArgument("adjoint_scaled: k must be 1 or 2");
  const ModePair m = adjoint_real(std::sqrt(c / 2.0) * z, eta);
  return k == 1 ? c * m.first : 0.5 * c * m.second;
}

Line1D::Line1D(int points, double left, double right) : n(points), lo(left), hi(right) {
  if (points < 4 || points % 2) throw InvalidArgument("Line1D: need an even number of points >= 4");
  if (!(right > left)) throw InvalidArgument("Line1D: empty interval");
}

Eigen::ArrayXd Line1D::xs() const {
  Eigen::ArrayXd out(n);
  for (int i = 0; i < n; ++i) out(i) = x(i);
  return out;
}

Eigen::ArrayXd Line1D::wavenumbers() const {
  Eigen::ArrayXd k(n);
  const double len = hi - lo;
  for (int i = 0; i < n; ++i) k(i) = 2.0 * M_PI * (i <= n / 2 ? i : i - n) / len;
  return k;
}

ResonantMode make_mode(double eta, const Line1D& line) {
  ResonantMode m{eta, resonant_beta(eta), resonant_lambda(eta), {}, Eigen::ArrayXcd(line.n)};
  if (eta != 0.0) m.g.resize(line.n);
  for (int i = 0; i < line.n; ++i) {
    const double x = line.x(i);
    if (eta != 0.0) m.g(i) = mode_g(x, eta);
    m.gstar(i) = mode_gstar(x, eta);
  }
  return m;
}

namespace {

Eigen::ArrayXcd fft_line(const Eigen::ArrayXcd& v) {
  Eigen::ArrayXcd out(v.size());
  fft::PlanComplex::get(static_cast<int>(v.size()))->forward(v.data(), out.data());
  return out / static_cast<double>(v.size());
}

Eigen::ArrayXcd ifft_line(const Eigen::ArrayXcd& v) {
  Eigen::ArrayXcd out(v.size());
  fft::PlanComplex::get(static_cast<int>(v.size()))->inverse(v.data(), out.data());
  return out;
}

// Multiplier 1/s with the s = 0 entry mapped to zero, after checking the mean.
Eigen::ArrayXcd inverse_derivative(const Eigen::ArrayXcd& vhat, const Eigen::ArrayXcd& s) {
  Eigen::ArrayXcd out = vhat;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) == cplx(0.0)) {
      if (std::abs(vhat(k)) > 1e-10 * (vhat.abs().maxCoeff() + 1e-300))
        throw InvalidArgument("apply_linearized: profile mean is not zero; the antiderivative is undefined");
      out(k) = 0.0;
    } else {
      out(k) /= s(k);
    }
  }
  return out;
}

Eigen::ArrayXd soliton_on(const Line1D& line, double c) {
  Eigen::ArrayXd phi(line.n);
  for (int i = 0; i < line.n; ++i) phi(i) = soliton_c(line.x(i), c);
  return phi;
}

}  // namespace

Eigen::ArrayXcd apply_linearized(const Line1D& line, const Eigen::ArrayXcd& v, double eta, double c, double alpha) {
  if (v.size() != line.n) throw InvalidArgument("apply_linearized: profile length mismatch");
  const Eigen::ArrayXcd s = I * line.wavenumbers().cast<cplx>() - alpha;
  const Eigen::ArrayXd phi = soliton_on(line, c);
  const Eigen::ArrayXcd vhat = fft_line(v);
  Eigen::ArrayXcd out = (-s * s * s + 2.0 * c * s) * vhat;
  if (eta != 0.0) out += 3.0 * eta * eta * inverse_derivative(vhat, s);
  out -= 6.0 * s * fft_line(phi.cast<cplx>() * v);
  return ifft_line(out);
}

Eigen::ArrayXcd apply_linearized_adjoint(const Line1D& line, const Eigen::ArrayXcd& w, double eta, double c,
                                         double alpha) {
  if (w.size() != line.n) throw InvalidArgument("apply_linearized_adjoint: profile length mismatch");
  const Eigen::ArrayXcd s = I * line.wavenumbers().cast<cplx>() + alpha;
  const Eigen::ArrayXd phi = soliton_on(line, c);
  const Eigen::ArrayXcd what = fft_line(w);
  Eigen::ArrayXcd out = (s * s * s - 2.0 * c * s) * what;
  if (eta != 0.0) out -= 3.0 * eta * eta * inverse_derivative(what, s);
  out += fft_line(6.0 * phi.cast<cplx>() * ifft_line(s * what));
  return ifft_line(out);
}

namespace {

// C-infinity cut-off: 1 on |x| <= inner, 0 at |x| >= outer.
double smooth_cutoff(double x, double inner, double outer) {
  const double a = std::abs(x);
  if (a <= inner) return 1.0;
  if (a >= outer) return 0.0;
  auto f = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
  const double u = (a - inner) / (outer - inner);
  return f(1.0 - u) / (f(1.0 - u) + f(u));
}

}  // namespace

EigenResidual eigen_residual(double eta, double alpha, const Line1D& line) {
  if (eta == 0.0) throw InvalidArgument("eigen_residual: eta must be non-zero");
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("eigen_residual: alpha must lie in (0, 2)");
  const double half = 0.5 * (line.hi - line.lo);
  const double centre = 0.5 * (line.hi + line.lo);
  const double inner = half - 6.0;
  const double measured = half - 10.0;
  const ResonantMode mode = make_mode(eta, line);
  Eigen::ArrayXcd gw(line.n), gsw(line.n);
  Eigen::ArrayXd window(line.n);
  for (int i = 0; i < line.n; ++i) {
    const double x = line.x(i);
    const double cut = smooth_cutoff(x - centre, inner, half);
    gw(i) = std::exp(alpha * x) * cut * mode.g(i);
    gsw(i) = std::exp(-alpha * x) * cut * mode.gstar(i);
    window(i) = std::abs(x - centre) <= measured ? 1.0 : 0.0;
  }
  const Eigen::ArrayXcd rf = apply_linearized(line, gw, eta, 2.0, alpha) - mode.lambda * gw;
  const Eigen::ArrayXcd ra = apply_linearized_adjoint(line, gsw, eta, 2.0, alpha) - std::conj(mode.lambda) * gsw;
  auto norm = [&](const Eigen::ArrayXcd& a) { return std::sqrt((window * a.abs2()).sum()); };
  return {norm(rf) / norm(gw), norm(ra) / norm(gsw)};
}

Eigen::Matrix2d pairing_matrix(double eta, const Eigen::ArrayXd& x, double dx) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const ModePair g = mode_real(x(i), eta);
    const ModePair gs = adjoint_real(x(i), eta);
    m(0, 0) += g.first * gs.first;
    m(0, 1) += g.second * gs.first;
    m(1, 0) += g.first * gs.second;
    m(1, 1) += g.second * gs.second;
  }
  return m * dx;
}

ResonantProjector::ResonantProjector(const Grid2D& grid, double eta0) : grid_(grid), eta0_(eta0) {
  if (!(eta0 >= grid.eta_spacing() * (1.0 - 1e-12)))
    throw InvalidArgument("resonant band: eta0 = " + std::to_string(eta0) +
                          " is below the grid eta-spacing " + std::to_string(grid.eta_spacing()));
  for (int m = 0; m < grid.ny(); ++m)
    if (std::abs(grid.eta()(m)) <= eta0 * (1.0 + 1e-12) && m != grid.ny() / 2) band_.push_back(m);
  for (int m : band_) {
    const double eta = grid.eta()(m);
    Eigen::ArrayXd a(grid.nx()), b(grid.nx()), as(grid.nx()), bs(grid.nx());
    for (int i = 0; i < grid.nx(); ++i) {
      const ModePair g = mode_real(grid.x(i), eta);
      const ModePair gs = adjoint_real(grid.x(i), eta);
      a(i) = g.first;
      b(i) = g.second;
      as(i) = gs.first;
      bs(i) = gs.second;
    }
    Eigen::Matrix2d pm;
    pm << (a * as).sum(), (b * as).sum(), (a * bs).sum(), (b * bs).sum();
    pairings_.push_back(pm * grid.dx());
    g1_.push_back(a);
    g2_.push_back(b);
    g1s_.push_back(as);
    g2s_.push_back(bs);
  }
}

Eigen::MatrixX2cd ResonantProjector::pairings_of(const RealField2D& f) const {
  if (!f.grid.same_shape(grid_)) throw InvalidArgument("projector: field grid mismatch");
  Eigen::MatrixX2cd out(band_.size(), 2);
  for (std::size_t p = 0; p < band_.size(); ++p) {
    const double eta = grid_.eta()(band_[p]);
    Eigen::ArrayXcd phase(grid_.ny());
    for (int j = 0; j < grid_.ny(); ++j) phase(j) = std::polar(1.0 / grid_.ny(), -eta * grid_.y(j));
    const Eigen::ArrayXcd line = (f.values.cast<cplx>().matrix() * phase.matrix()).array();
    out(p, 0) = (line * g1s_[p]).sum() * grid_.dx();
    out(p, 1) = (line * g2s_[p]).sum() * grid_.dx();
  }
  return out;
}

RealField2D ResonantProjector::p0(const RealField2D& f) const {
  const Eigen::MatrixX2cd b = pairings_of(f);
  RealField2D out(grid_);
  for (std::size_t p = 0; p < band_.size(); ++p) {
    const double eta = grid_.eta()(band_[p]);
    const Eigen::Vector2cd a = pairings_[p].cast<cplx>().inverse() * b.row(p).transpose();
    const Eigen::ArrayXcd profile = a(0) * g1_[p].cast<cplx>() + a(1) * g2_[p].cast<cplx>();
    for (int j = 0; j < grid_.ny(); ++j) out.values.col(j) += (profile * std::polar(1.0, eta * grid_.y(j))).real();
  }
  return out;
}

RealField2D ResonantProjector::p1(const RealField2D& f, double cutoff) const {
  Spectrum2D s = forward(f);
  for (int m = 0; m < grid_.ny(); ++m)
    if (std::abs(grid_.eta()(m)) > cutoff * (1.0 + 1e-12) || m == grid_.ny() / 2) s.coeffs.col(m).setZero();
  return inverse(s);
}

RealField2D ResonantProjector::p2(const RealField2D& f, double cutoff) const {
  if (cutoff < eta0_) throw InvalidArgument("projector: cutoff must be >= eta0");
  RealField2D out = p1(f, cutoff);
  out.values -= p0(f).values;
  return out;
}

namespace {

Eigen::ArrayXXcd weighted_symbol(const Grid2D& g, double alpha) {
  Eigen::ArrayXXcd sym(g.nxh(), g.ny());
  for (int m = 0; m < g.ny(); ++m)
    for (int k = 0; k < g.nxh(); ++k) {
      const cplx s(-alpha, g.xi()(k));
      const double eta = g.eta()(m);
      sym(k, m) = -s * s * s + 4.0 * s + 3.0 * eta * eta / s;
    }
  return sym;
}

}  // namespace

DecayProbe semigroup_decay_probe(const RealField2D& w0, double alpha, bool with_potential, double t_end, double dt,
                                 int samples) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidArgument("decay probe: alpha must lie in (0, 2)");
  if (!(t_end > 0.0) || samples < 4) throw InvalidArgument("decay probe: need t_end > 0 and >= 4 samples");
  const Grid2D& g = w0.grid;
  const Eigen::ArrayXXcd sym = weighted_symbol(g, alpha);
  DecayProbe out;
  out.spectral_bound = sym.real().maxCoeff();

  Eigen::ArrayXXcd s_mult(g.nxh(), g.ny());
  for (int m = 0; m < g.ny(); ++m)
    for (int k = 0; k < g.nxh(); ++k) s_mult(k, m) = cplx(-alpha, g.xi()(k));
  Eigen::ArrayXXd phi(g.nx(), g.ny());
  for (int i = 0; i < g.nx(); ++i) phi.row(i).setConstant(soliton_profile(g.x(i), 2.0));
  const double norm = 1.0 / (static_cast<double>(g.nx()) * g.ny());
  Eigen::ArrayXXd work(g.nx(), g.ny());
  auto potential = [&](const Eigen::ArrayXXcd& v) -> Eigen::ArrayXXcd {
    if (!with_potential) return Eigen::ArrayXXcd::Zero(v.rows(), v.cols());
    g.plan().inverse(v.data(), work.data());
    work *= phi;
    Eigen::ArrayXXcd out_hat(g.nxh(), g.ny());
    g.plan().forward(work.data(), out_hat.data());
    return -6.0 * norm * s_mult * out_hat;
  };

  const long total = std::max(1L, steps_for(t_end, dt));
  const double h = t_end / total;
  const Etdrk4 scheme(sym, h);
  Spectrum2D state = forward(w0);
  const long every = std::max(1L, total / samples);
  out.times.push_back(0.0);
  out.norms.push_back(l2_norm(state));
  for (long n = 1; n <= total; ++n) {
    scheme.step(state.coeffs, potential);
    if (n % every == 0 || n == total) {
      out.times.push_back(n * h);
      out.norms.push_back(l2_norm(state));
    }
  }
  // Least-squares slope of log-norm over the second half of the window.
  double st = 0, sl = 0, stt = 0, stl = 0;
  int cnt = 0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    if (out.times[i] < 0.5 * t_end || !(out.norms[i] > 0)) continue;
    const double t = out.times[i], l = std::log(out.norms[i]);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    ++cnt;
  }
  const double slope = (cnt * stl - st * sl) / (cnt * stt - st * st);
  out.fitted_rate = -slope;
  out.growth = slope > 1e-3;
  return out;
}

RealField2D weighted_p2_data(const RealField2D& f, double alpha, double eta0, double cutoff) {
  const ResonantProjector proj(f.grid, eta0);
  RealField2D w = proj.p2(f, cutoff);
  for (int i = 0; i < f.grid.nx(); ++i) w.values.row(i) *= std::exp(alpha * f.grid.x(i));
  return w;
}

}  // namespace kpline

#include "kpline/reduced.hpp"

#include <cmath>

#include "kpline/fft.hpp"

namespace kpline {

namespace mc = modulation_constants;

Dispersion dispersion(double eta) {
  const cplx i(0.0, 1.0);
  Dispersion d;
  d.a_star << -3.0 * eta * eta, 8.0 * i * eta, i * eta * (2.0 + mc::mu3 * eta * eta), -eta * eta;
  d.omega = std::sqrt(16.0 + (8.0 * mc::mu3 - 1.0) * eta * eta);
  d.lambda_plus = cplx(-2.0 * eta * eta, eta * d.omega);
  d.lambda_minus = cplx(-2.0 * eta * eta, -eta * d.omega);
  d.pi_star << 8.0 * i, 8.0 * i, cplx(eta, d.omega), cplx(eta, -d.omega);
  d.pi_star /= 4.0 * i;
  return d;
}

namespace {

double b_of_c(double c) { return (std::sqrt(2.0) * std::pow(c, 1.5) - 4.0) / 3.0; }

}  // namespace

Eigen::ArrayXd b_transform(const YBand& band, const Eigen::ArrayXd& c) {
  if ((c <= 0.0).any()) throw InvalidArgument("b_transform: c must be positive");
  return band.project(c.unaryExpr(&b_of_c));
}

Eigen::ArrayXd b_inverse(const YBand& band, const Eigen::ArrayXd& b, double tol, int max_iter) {
  // Pointwise inverse as a start, then Newton on the band-limited amplitude.
  Eigen::ArrayXd root = (3.0 * b + 4.0) / std::sqrt(2.0);
  if ((root <= 0.0).any()) throw InvalidArgument("b_inverse: b below the admissible range");
  Eigen::ArrayXd c = 2.0 + band.project(root.pow(2.0 / 3.0) - 2.0);
  for (int it = 0; it < max_iter; ++it) {
    if ((c <= 0.0).any()) throw InvalidArgument("b_inverse: iteration left c > 0");
    const Eigen::ArrayXd mismatch = b - b_transform(band, c);
    const Eigen::ArrayXd update = band.project(mismatch / (c.sqrt() / std::sqrt(2.0)));
    c += update;
    if (update.abs().maxCoeff() < tol) return c;
  }
  throw InvalidArgument("b_inverse: no convergence");
}

Eigen::ArrayXd spectral_dy(const Eigen::ArrayXd& f, double ly, int order) {
  const int n = static_cast<int>(f.size());
  auto plan = fft::PlanLines::get(n, 1);
  Eigen::ArrayXcd hat(n / 2 + 1);
  plan->forward(f.data(), hat.data());
  for (int m = 0; m <= n / 2; ++m) hat(m) *= std::pow(cplx(0.0, 2.0 * M_PI * m / ly), order) / double(n);
  if (order % 2) hat(n / 2) = 0.0;
  Eigen::ArrayXd out(n);
  plan->inverse(hat.data(), out.data());
  return out;
}

GValues g_eval(const Eigen::ArrayXd& c, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c_t, const Eigen::ArrayXd& x_t,
               double ly) {
  if ((c <= 0.0).any()) throw InvalidArgument("g_eval: c must be positive");
  const Eigen::ArrayXd cy = spectral_dy(c, ly), cyy = spectral_dy(c, ly, 2);
  const Eigen::ArrayXd xy = spectral_dy(x, ly), xyy = spectral_dy(x, ly, 2);
  const Eigen::ArrayXd half = c / 2.0;
  const Eigen::ArrayXd transport = c_t - 6.0 * cy * xy;
  GValues g;
  g.g1 = 16.0 * xyy * half.pow(1.5) - 2.0 * transport * half.sqrt() + 6.0 * cyy - 3.0 / c * cy.square();
  g.g2 = -2.0 * (x_t - 2.0 * c - 3.0 * xy.square()) * half.square() + 6.0 * xyy * half.pow(1.5) -
         0.5 * transport * half.sqrt() + mc::mu1 * cyy + mc::mu2 * cy.square() / half;
  return g;
}

namespace {

Eigen::ArrayXXcd diagonal_symbol(const std::vector<Dispersion>& disp) {
  Eigen::ArrayXXcd sym(disp.size(), 2);
  for (std::size_t m = 0; m < disp.size(); ++m) {
    sym(m, 0) = disp[m].lambda_plus;
    sym(m, 1) = disp[m].lambda_minus;
  }
  return sym;
}

std::vector<Dispersion> band_dispersion(const YBand& band) {
  std::vector<Dispersion> d;
  for (double eta : band.etas()) d.push_back(dispersion(eta));
  return d;
}

}  // namespace

ReducedModel::ReducedModel(const YBand& band, double dt, bool nonlinear)
    : band_(band), nonlinear_(nonlinear), scheme_(diagonal_symbol(band_dispersion(band)), dt),
      disp_(band_dispersion(band)) {}

Eigen::ArrayXd ReducedModel::profile(const CrestState& s, int component) const {
  Eigen::VectorXd coords(band_.dimension());
  coords(0) = s.coeffs(0, component).real();
  for (int m = 1; m <= band_.highest(); ++m) {
    coords(2 * m - 1) = s.coeffs(m, component).real();
    coords(2 * m) = s.coeffs(m, component).imag();
  }
  return band_.synthesize(coords);
}

namespace {

Eigen::ArrayXcd band_coeffs(const YBand& band, const Eigen::ArrayXd& f) {
  const Eigen::VectorXd a = band.analyze(f);
  Eigen::ArrayXcd out(band.highest() + 1);
  out(0) = a(0);
  for (int m = 1; m <= band.highest(); ++m) out(m) = cplx(a(2 * m - 1), a(2 * m));
  return out;
}

}  // namespace

CrestState ReducedModel::from_profiles(const Eigen::ArrayXd& b1, const Eigen::ArrayXd& b2, double t) const {
  CrestState s{Eigen::ArrayXXcd(band_.highest() + 1, 2), t};
  s.coeffs.col(0) = band_coeffs(band_, b1);
  s.coeffs.col(1) = band_coeffs(band_, b2);
  return s;
}

CrestState ReducedModel::from_modulation(const Eigen::ArrayXd& c, const Eigen::ArrayXd& x, double t) const {
  const Eigen::ArrayXcd bh = band_coeffs(band_, b_transform(band_, c));
  const Eigen::ArrayXcd xyh = band_coeffs(band_, band_.derivative(x));
  CrestState s{Eigen::ArrayXXcd(band_.highest() + 1, 2), t};
  for (int m = 0; m <= band_.highest(); ++m) {
    const Eigen::Vector2cd v = disp_[m].pi_star.inverse() * Eigen::Vector2cd(bh(m), xyh(m));
    s.coeffs(m, 0) = v(0);
    s.coeffs(m, 1) = v(1);
  }
  return s;
}

ReducedModel::Physical ReducedModel::to_physical(const CrestState& s) const {
  CrestState mixed = s;
  for (int m = 0; m <= band_.highest(); ++m) {
    const Eigen::Vector2cd v = disp_[m].pi_star * Eigen::Vector2cd(s.coeffs(m, 0), s.coeffs(m, 1));
    mixed.coeffs(m, 0) = v(0);
    mixed.coeffs(m, 1) = v(1);
  }
  Physical p;
  p.b = profile(mixed, 0);
  p.x_y = profile(mixed, 1);
  p.c = b_inverse(band_, p.b);
  return p;
}

Eigen::ArrayXXcd ReducedModel::quadratic(const Eigen::ArrayXXcd& v) const {
  Eigen::ArrayXXcd out = Eigen::ArrayXXcd::Zero(v.rows(), v.cols());
  if (!nonlinear_) return out;
  const CrestState s{v, 0.0};
  const Eigen::ArrayXd b1 = profile(s, 0), b2 = profile(s, 1);
  const Eigen::ArrayXd n1 = 4.0 * b1.square() - 4.0 * b1 * b2 - 2.0 * b2.square();
  const Eigen::ArrayXd n2 = 2.0 * b1.square() + 4.0 * b1 * b2 - 4.0 * b2.square();
  out.col(0) = band_coeffs(band_, n1);
  out.col(1) = band_coeffs(band_, n2);
  for (int m = 0; m <= band_.highest(); ++m) out.row(m) *= cplx(0.0, band_.etas()[m]);
  return out;
}

void ReducedModel::step(CrestState& s) const {
  scheme_.step(s.coeffs, [this](const Eigen::ArrayXXcd& v) { return quadratic(v); });
  s.t += scheme_.h();
}

void ReducedModel::evolve(CrestState& s, double t_end, double limit) const {
  const long n = std::lround((t_end - s.t) / scheme_.h());
  for (long k = 0; k < n; ++k) {
    step(s);
    if (!s.coeffs.allFinite() || s.coeffs.abs().maxCoeff() > limit)
      throw InvalidArgument("reduced model: blow-up guard tripped at t = " + std::to_string(s.t));
  }
}

std::vector<CompareRow> compare(const std::vector<CrestSample>& full, const std::vector<CrestSample>& reduced,
                                double dy) {
  if (full.size() != reduced.size()) throw InvalidArgument("compare: series lengths differ");
  std::vector<CompareRow> rows;
  for (std::size_t k = 0; k < full.size(); ++k) {
    const auto& a = full[k];
    const auto& b = reduced[k];
    if (std::abs(a.t - b.t) > 1e-9 * std::max(1.0, std::abs(a.t)))
      throw InvalidArgument("compare: misaligned time stamps at entry " + std::to_string(k));
    if (a.c.size() != b.c.size() || a.x_y.size() != b.x_y.size())
      throw InvalidArgument("compare: profile sizes differ");
    const Eigen::ArrayXd dc = a.c - b.c, dx = a.x_y - b.x_y;
    rows.push_back({a.t, std::sqrt(dc.square().sum() * dy), std::sqrt(dx.square().sum() * dy), dc.abs().maxCoeff(),
                    dx.abs().maxCoeff()});
  }
  return rows;
}

DiagnosticsSeries compare_series(const std::vector<CompareRow>& rows) {
  DiagnosticsSeries s({"t", "err_c_l2", "err_xy_l2", "err_c_sup", "err_xy_sup"});
  for (const auto& r : rows) s.append({r.t, r.err_c_l2, r.err_xy_l2, r.err_c_sup, r.err_xy_sup});
  return s;
}

}  // namespace kpline

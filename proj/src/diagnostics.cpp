#include "kpline/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "kpline/soliton.hpp"

namespace kpline {

namespace {

double cell(const Grid2D& g) { return g.dx() * g.dy(); }

void require_zero_mean(const RealField2D& w, double tol) {
  const double scale = w.values.abs().maxCoeff();
  if (scale == 0.0) return;
  const double worst = (line_integrals(w) / w.grid.lx()).abs().maxCoeff();
  if (worst > tol * scale)
    throw InvalidArgument("zero-mean contract violated: an x-line has mean " + std::to_string(worst));
}

// d_x w and d_x^{-1} d_y w on the grid.
std::pair<RealField2D, RealField2D> gradient_pair(const RealField2D& w) {
  const Spectrum2D s = forward(w);
  return {inverse(deriv_x(s)), inverse(antideriv_x(deriv_y(s)))};
}

}  // namespace

double norm_X(const RealField2D& v, double alpha, double origin, double front) {
  const Grid2D& g = v.grid;
  const double shift = std::isnan(front) ? 0.0 : front - 0.5 * g.lx();
  double acc = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    const double z = shift + wrap_periodic(g.x(i) - origin - shift, g.lx());
    acc += std::exp(2.0 * alpha * z) * v.values.row(i).square().sum();
  }
  return std::sqrt(acc * cell(g));
}

double norm_W(const RealField2D& v, double alpha, double t, double offset_L, double origin) {
  const Grid2D& g = v.grid;
  double acc = 0.0;
  for (int i = 0; i < g.nx(); ++i) {
    const double z = wrap_periodic(g.x(i) - origin, g.lx());
    const double zb = wrap_periodic(z + 3.0 * t + offset_L, g.lx());
    const double w = std::exp(-0.5 * alpha * std::abs(z)) + std::exp(-alpha * std::abs(zb));
    acc += w * w * v.values.row(i).square().sum();
  }
  return std::sqrt(acc * cell(g));
}

Eigen::ArrayXXd energy_density(const RealField2D& w, double mean_tol) {
  require_zero_mean(w, mean_tol);
  const auto [wx, wy] = gradient_pair(w);
  return 3.0 * wx.values.square() + 3.0 * wy.values.square() + 4.0 * w.values.square();
}

double energy_E(const RealField2D& w, const Eigen::ArrayXd& x_weight, double mean_tol) {
  if (x_weight.size() != w.grid.nx()) throw InvalidArgument("energy_E: weight must have nx entries");
  const Eigen::ArrayXXd e = energy_density(w, mean_tol);
  return (e.colwise() * x_weight).sum() * cell(w.grid);
}

Eigen::ArrayXd virial_weight(const Grid2D& g, double eps, double centre) {
  Eigen::ArrayXd chi(g.nx());
  for (int i = 0; i < g.nx(); ++i) chi(i) = 1.0 + std::tanh(eps * wrap_periodic(g.x(i) - centre, g.lx()));
  return chi;
}

Eigen::ArrayXd virial_weight_dx(const Grid2D& g, double eps, double centre) {
  Eigen::ArrayXd d(g.nx());
  for (int i = 0; i < g.nx(); ++i) {
    const double s = 1.0 / std::cosh(eps * wrap_periodic(g.x(i) - centre, g.lx()));
    d(i) = eps * s * s;
  }
  return d;
}

double virial_I(const RealField2D& v, double eps, double centre) {
  const Eigen::ArrayXd chi = virial_weight(v.grid, eps, centre);
  return (v.values.square().colwise() * chi).sum() * cell(v.grid);
}

double virial_dissipation(const RealField2D& v, double eps, double centre, double mean_tol) {
  require_zero_mean(v, mean_tol);
  const auto [vx, vy] = gradient_pair(v);
  const Eigen::ArrayXd dchi = virial_weight_dx(v.grid, eps, centre);
  const Eigen::ArrayXXd density = vx.values.square() + vy.values.square() + v.values.square();
  return (density.colwise() * dchi).sum() * cell(v.grid);
}

QValues q_functional(const RealField2D& v, const Eigen::ArrayXd& amplitude, double t, double offset_L) {
  const Grid2D& g = v.grid;
  if (amplitude.size() != g.ny()) throw InvalidArgument("q_functional: amplitude needs ny entries");
  double acc = 0.0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double zb = wrap_periodic(g.x(i) + 3.0 * t + offset_L, g.lx());
      const double val = v.values(i, j);
      acc += val * val - 2.0 * mass_correction(zb, amplitude(j), 0.0) * val;
    }
  const double q = acc * cell(g);
  const double drift = (amplitude.sqrt() - std::sqrt(2.0)).square().sum() * g.dy();
  return {q, q + 8.0 * kUnitBumpNormSquared * drift};
}

double aniso_ratio(const RealField2D& u, double alpha, double p) {
  if (!(p >= 2.0 && p <= 6.0)) throw InvalidArgument("aniso_ratio: p must lie in [2, 6]");
  const Grid2D& g = u.grid;
  RealField2D weighted = u;
  for (int i = 0; i < g.nx(); ++i) weighted.values.row(i) *= std::exp(alpha * g.x(i));
  const double lhs = p == 2.0 ? norm_X(u, alpha) : lp_norm(weighted, p);
  const double base = norm_X(u, alpha);
  double rhs = base;
  if (p != 2.0) {
    require_zero_mean(u, 1e-8);
    const auto [ux, uy] = gradient_pair(u);
    const double grad = norm_X(ux, alpha) + norm_X(uy, alpha) + base;
    rhs = std::pow(base, 3.0 / p - 0.5) * std::pow(grad, 1.5 - 3.0 / p);
  }
  if (rhs == 0.0) {
    if (lhs != 0.0) throw InvalidArgument("aniso_ratio: vanishing right-hand side with non-zero field");
    return 0.0;
  }
  return lhs / rhs;
}

DiagnosticsSeries::DiagnosticsSeries(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw InvalidArgument("series needs at least one column");
}

void DiagnosticsSeries::append(const std::vector<double>& row) {
  if (row.size() != columns_.size()) throw InvalidArgument("series row width mismatch");
  if (!rows_.empty() && !(row[0] > rows_.back()[0])) throw InvalidArgument("series time must strictly increase");
  rows_.push_back(row);
}

std::vector<double> DiagnosticsSeries::column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw InvalidArgument("series has no column " + name);
  const auto k = static_cast<std::size_t>(it - columns_.begin());
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[k]);
  return out;
}

void DiagnosticsSeries::write_csv(std::ostream& os) const {
  for (std::size_t k = 0; k < columns_.size(); ++k) os << (k ? "," : "") << columns_[k];
  os << '\n';
  char buf[40];
  for (const auto& r : rows_) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r[k]);
      os << (k ? "," : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace kpline

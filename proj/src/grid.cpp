#include "kpline/grid.hpp"

#include <cmath>
#include <string>

namespace kpline {

Grid2D::Grid2D(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 2 || ny < 2 || nx % 2 || ny % 2)
    throw InvalidArgument("grid: nx and ny must be even and >= 2 (got " + std::to_string(nx) + ", " +
                          std::to_string(ny) + ")");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw InvalidArgument("grid: lx and ly must be positive and finite");
  xs_.resize(nx);
  ys_.resize(ny);
  for (int i = 0; i < nx; ++i) xs_(i) = x(i);
  for (int j = 0; j < ny; ++j) ys_(j) = y(j);
  xi_.resize(nxh());
  for (int k = 0; k < nxh(); ++k) xi_(k) = 2.0 * M_PI * k / lx;
  eta_.resize(ny);
  for (int m = 0; m < ny; ++m) eta_(m) = 2.0 * M_PI * (m <= ny / 2 ? m : m - ny) / ly;
  plan_ = fft::Plan2D::get(nx, ny);
  lines_ = fft::PlanLines::get(nx, ny);
}

bool Grid2D::same_shape(const Grid2D& o) const {
  return nx_ == o.nx_ && ny_ == o.ny_ && lx_ == o.lx_ && ly_ == o.ly_;
}

RealField2D::RealField2D(const Grid2D& g, Eigen::ArrayXXd v) : grid(g), values(std::move(v)) {
  if (values.rows() != g.nx() || values.cols() != g.ny())
    throw InvalidArgument("field: array shape does not match grid");
}

Spectrum2D::Spectrum2D(const Grid2D& g, Eigen::ArrayXXcd c) : grid(g), coeffs(std::move(c)) {
  if (coeffs.rows() != g.nxh() || coeffs.cols() != g.ny())
    throw InvalidArgument("spectrum: array shape does not match grid");
}

Spectrum2D forward(const RealField2D& f) {
  Spectrum2D s(f.grid);
  f.grid.plan().forward(f.values.data(), s.coeffs.data());
  s.coeffs /= static_cast<double>(f.grid.nx()) * f.grid.ny();
  return s;
}

RealField2D inverse(const Spectrum2D& s) {
  RealField2D f(s.grid);
  s.grid.plan().inverse(s.coeffs.data(), f.values.data());
  return f;
}

Spectrum2D antideriv_x(const Spectrum2D& s) {
  Spectrum2D out(s.grid);
  const auto& xi = s.grid.xi();
  for (int k = 1; k < s.grid.nxh(); ++k) out.coeffs.row(k) = s.coeffs.row(k) / cplx(0.0, xi(k));
  out.coeffs.row(s.grid.nx() / 2).setZero();
  return out;
}

Spectrum2D deriv_x(const Spectrum2D& s, int order) {
  Spectrum2D out(s.grid);
  const auto& xi = s.grid.xi();
  for (int k = 0; k < s.grid.nxh(); ++k) out.coeffs.row(k) = s.coeffs.row(k) * std::pow(cplx(0.0, xi(k)), order);
  if (order % 2) out.coeffs.row(s.grid.nx() / 2).setZero();
  return out;
}

Spectrum2D deriv_y(const Spectrum2D& s, int order) {
  Spectrum2D out(s.grid);
  const auto& eta = s.grid.eta();
  for (int m = 0; m < s.grid.ny(); ++m) out.coeffs.col(m) = s.coeffs.col(m) * std::pow(cplx(0.0, eta(m)), order);
  if (order % 2) out.coeffs.col(s.grid.ny() / 2).setZero();
  return out;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> dealias_mask(const Grid2D& g) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask(g.nxh(), g.ny());
  const double xcut = 2.0 / 3.0 * g.xi_max();
  const double ycut = 2.0 / 3.0 * g.eta_max();
  for (int m = 0; m < g.ny(); ++m)
    for (int k = 0; k < g.nxh(); ++k) mask(k, m) = g.xi()(k) <= xcut && std::abs(g.eta()(m)) <= ycut;
  return mask;
}

void dealias(Spectrum2D& s) {
  const auto mask = dealias_mask(s.grid);
  s.coeffs = mask.select(s.coeffs, cplx(0.0));
}

RealField2D shift_lines(const RealField2D& f, const Eigen::ArrayXd& shift) {
  const Grid2D& g = f.grid;
  if (shift.size() != g.ny()) throw InvalidArgument("shift_lines: one shift per y-line required");
  Eigen::ArrayXXcd lines(g.nxh(), g.ny());
  g.line_plan().forward(f.values.data(), lines.data());
  const auto& xi = g.xi();
  for (int j = 0; j < g.ny(); ++j) {
    for (int k = 0; k < g.nxh(); ++k) lines(k, j) *= std::polar(1.0, -xi(k) * shift(j));
    // Keep the Nyquist mode real so the shifted line stays real-valued.
    lines(g.nx() / 2, j) = cplx(lines(g.nx() / 2, j).real() * std::cos(xi(g.nx() / 2) * shift(j)), 0.0);
  }
  RealField2D out(g);
  g.line_plan().inverse(lines.data(), out.values.data());
  out.values /= g.nx();
  return out;
}

double integrate(const RealField2D& f) { return f.values.sum() * f.grid.dx() * f.grid.dy(); }

double l2_norm(const RealField2D& f) { return std::sqrt(f.values.square().sum() * f.grid.dx() * f.grid.dy()); }

double lp_norm(const RealField2D& f, double p) {
  return std::pow(f.values.abs().pow(p).sum() * f.grid.dx() * f.grid.dy(), 1.0 / p);
}

double l2_norm(const Spectrum2D& s) {
  const Grid2D& g = s.grid;
  double acc = s.coeffs.row(0).abs2().sum();
  const int nyq = g.nx() / 2;
  for (int k = 1; k < nyq; ++k) acc += 2.0 * s.coeffs.row(k).abs2().sum();
  acc += s.coeffs.row(nyq).abs2().sum();
  return std::sqrt(acc * g.lx() * g.ly());
}

Eigen::ArrayXd line_integrals(const RealField2D& f) {
  return f.values.colwise().sum().transpose() * f.grid.dx();
}

double wrap_periodic(double x, double length) {
  double r = std::fmod(x + 0.5 * length, length);
  if (r < 0) r += length;
  return r - 0.5 * length;
}

}  // namespace kpline

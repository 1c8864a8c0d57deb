#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <stdexcept>

#include "kpline/fft.hpp"

namespace kpline {

using cplx = std::complex<double>;

// Raised when inputs violate a documented precondition.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Periodic box [-lx/2, lx/2) x [-ly/2, ly/2) sampled at nx * ny points.
// Fields are column-major nx-by-ny arrays: each column is one x-line at fixed y.
class Grid2D {
 public:
  Grid2D(int nx, int ny, double lx, double ly);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nxh() const { return nx_ / 2 + 1; }  // stored x-wavenumbers (non-negative half)
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double dx() const { return lx_ / nx_; }
  double dy() const { return ly_ / ny_; }
  double x(int i) const { return -0.5 * lx_ + i * dx(); }
  double y(int j) const { return -0.5 * ly_ + j * dy(); }

  const Eigen::ArrayXd& xs() const { return xs_; }
  const Eigen::ArrayXd& ys() const { return ys_; }
  // xi(k) = 2 pi k / lx for k = 0..nx/2; eta(m) follows FFT ordering with the
  // Nyquist index counted as positive.
  const Eigen::ArrayXd& xi() const { return xi_; }
  const Eigen::ArrayXd& eta() const { return eta_; }
  double xi_max() const { return xi_(nx_ / 2); }
  double eta_max() const { return eta_(ny_ / 2); }
  double eta_spacing() const { return 2.0 * M_PI / ly_; }

  bool same_shape(const Grid2D& other) const;
  fft::Plan2D& plan() const { return *plan_; }
  fft::PlanLines& line_plan() const { return *lines_; }

 private:
  int nx_, ny_;
  double lx_, ly_;
  Eigen::ArrayXd xs_, ys_, xi_, eta_;
  std::shared_ptr<fft::Plan2D> plan_;
  std::shared_ptr<fft::PlanLines> lines_;
};

struct RealField2D {
  Grid2D grid;
  Eigen::ArrayXXd values;  // nx x ny

  explicit RealField2D(const Grid2D& g) : grid(g), values(Eigen::ArrayXXd::Zero(g.nx(), g.ny())) {}
  RealField2D(const Grid2D& g, Eigen::ArrayXXd v);

  template <class F>
  static RealField2D sample(const Grid2D& g, F&& f) {
    RealField2D out(g);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) out.values(i, j) = f(g.x(i), g.y(j));
    return out;
  }
};

// Coefficients normalised so that coeffs(0,0) is the mean and coeffs(0,m) is
// the m-th y-Fourier coefficient of the x-mean of each line.
struct Spectrum2D {
  Grid2D grid;
  Eigen::ArrayXXcd coeffs;  // (nx/2+1) x ny

  explicit Spectrum2D(const Grid2D& g) : grid(g), coeffs(Eigen::ArrayXXcd::Zero(g.nxh(), g.ny())) {}
  Spectrum2D(const Grid2D& g, Eigen::ArrayXXcd c);
};

Spectrum2D forward(const RealField2D& f);
RealField2D inverse(const Spectrum2D& s);

// Pointwise multiplication by m(xi, eta) over the stored half spectrum.
template <class M>
Spectrum2D apply_multiplier(const Spectrum2D& s, M&& m) {
  Spectrum2D out(s.grid);
  const auto& xi = s.grid.xi();
  const auto& eta = s.grid.eta();
  for (int j = 0; j < s.grid.ny(); ++j)
    for (int k = 0; k < s.grid.nxh(); ++k) out.coeffs(k, j) = s.coeffs(k, j) * cplx(m(xi(k), eta(j)));
  return out;
}

// Multiplier 1/(i xi) with the xi = 0 row mapped to zero.
Spectrum2D antideriv_x(const Spectrum2D& s);
Spectrum2D deriv_x(const Spectrum2D& s, int order = 1);
Spectrum2D deriv_y(const Spectrum2D& s, int order = 1);

// 2/3-rule mask: true where the mode survives.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> dealias_mask(const Grid2D& g);
void dealias(Spectrum2D& s);

// Per-line translation: out(x, y_j) = f(x - shift(j)), spectrally exact.
RealField2D shift_lines(const RealField2D& f, const Eigen::ArrayXd& shift);

// Riemann sums on the periodic grid (spectrally accurate for smooth data).
double integrate(const RealField2D& f);
double l2_norm(const RealField2D& f);
double lp_norm(const RealField2D& f, double p);
// Parseval with the half-spectrum weights; equals l2_norm(inverse(s)).
double l2_norm(const Spectrum2D& s);
Eigen::ArrayXd line_integrals(const RealField2D& f);  // integral over x of each line

// Wraps x into [-lx/2, lx/2).
double wrap_periodic(double x, double length);

}  // namespace kpline

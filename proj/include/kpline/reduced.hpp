#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "kpline/decomp.hpp"
#include "kpline/diagnostics.hpp"
#include "kpline/etdrk4.hpp"

namespace kpline {

namespace modulation_constants {
inline const double mu1 = 0.5 - M_PI * M_PI / 12.0;
inline const double mu2 = M_PI * M_PI / 32.0 - 3.0 / 16.0;
inline const double mu3 = 0.5 + M_PI * M_PI / 24.0;
}  // namespace modulation_constants

struct Dispersion {
  Eigen::Matrix2cd a_star;
  double omega;
  Eigen::Matrix2cd pi_star;  // columns are the eigenvectors for lambda_plus, lambda_minus
  cplx lambda_plus, lambda_minus;
};
Dispersion dispersion(double eta);

// b = (1/3) P(sqrt(2) c^{3/2} - 4) with P the band projection, and its inverse
// restricted to band-limited amplitudes.
Eigen::ArrayXd b_transform(const YBand& band, const Eigen::ArrayXd& c);
Eigen::ArrayXd b_inverse(const YBand& band, const Eigen::ArrayXd& b, double tol = 1e-14, int max_iter = 100);

struct GValues {
  Eigen::ArrayXd g1, g2;
};
// Spectral y-derivatives over the full y-grid (no band restriction).
GValues g_eval(const Eigen::ArrayXd& c, const Eigen::ArrayXd& x, const Eigen::ArrayXd& c_t,
               const Eigen::ArrayXd& x_t, double ly);
Eigen::ArrayXd spectral_dy(const Eigen::ArrayXd& f, double ly, int order = 1);

// Diagonal crest variables on the band, stored as complex band coefficients
// (rows m = 0..M, columns b1, b2).
struct CrestState {
  Eigen::ArrayXXcd coeffs;
  double t = 0.0;
};

class ReducedModel {
 public:
  ReducedModel(const YBand& band, double dt, bool nonlinear = true);

  const YBand& band() const { return band_; }
  double dt() const { return scheme_.h(); }

  CrestState from_modulation(const Eigen::ArrayXd& c, const Eigen::ArrayXd& x, double t) const;
  // (b, x_y) profiles and the amplitude c recovered through b_inverse.
  struct Physical {
    Eigen::ArrayXd b, x_y, c;
  };
  Physical to_physical(const CrestState& s) const;
  Eigen::ArrayXd profile(const CrestState& s, int component) const;  // b1 or b2 on the y-grid
  CrestState from_profiles(const Eigen::ArrayXd& b1, const Eigen::ArrayXd& b2, double t) const;

  void step(CrestState& s) const;
  // Guard: throws NumericHalt-like InvalidArgument if the state stops being finite
  // or grows past `limit` in sup norm.
  void evolve(CrestState& s, double t_end, double limit = 1e3) const;

 private:
  Eigen::ArrayXXcd quadratic(const Eigen::ArrayXXcd& v) const;
  YBand band_;
  bool nonlinear_;
  Etdrk4 scheme_;
  std::vector<Dispersion> disp_;
};

// L^2(y) and sup discrepancies between extracted and reduced c and x_y.
struct CompareRow {
  double t, err_c_l2, err_xy_l2, err_c_sup, err_xy_sup;
};
struct CrestSample {
  double t;
  Eigen::ArrayXd c, x_y;
};
std::vector<CompareRow> compare(const std::vector<CrestSample>& full, const std::vector<CrestSample>& reduced,
                                double dy);
DiagnosticsSeries compare_series(const std::vector<CompareRow>& rows);

}  // namespace kpline

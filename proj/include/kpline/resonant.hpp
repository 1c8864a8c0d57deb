#pragma once

#include <Eigen/Dense>

#include <vector>

#include "kpline/grid.hpp"

namespace kpline {

// Principal square root of 1 + i eta, and the resonant eigenvalue 4 i eta beta.
cplx resonant_beta(double eta);
cplx resonant_lambda(double eta);

// Complex resonant mode g(x, eta) (eta != 0) and its adjoint partner.
cplx mode_g(double x, double eta);
cplx mode_gstar(double x, double eta);

// Real combinations, even in eta and regular at eta = 0:
//   g1 = 2 Re g, g2 = -2 eta Im g, g1* = Re g*, g2* = -Im g* / eta.
// Small-eta cancellations are removed analytically, so eta = 0 is exact.
struct ModePair {
  double first;
  double second;
};
ModePair mode_real(double x, double eta);
ModePair adjoint_real(double x, double eta);

// adjoint_real with the eta-dependent constants computed once.
class AdjointModes {
 public:
  explicit AdjointModes(double eta);
  ModePair operator()(double x) const;
  // (c g1*(s z), (c/2) g2*(s z)) with s = sqrt(c/2).
  ModePair scaled(double z, double c) const;

 private:
  double eta_;
  cplx rbar_, delta_;
};

// Adjoint modes attached to a soliton of amplitude c (k = 1 or 2).
double adjoint_scaled(double z, double eta, double c, int k);

// Uniform periodic 1-D grid on [lo, hi).
struct Line1D {
  int n;
  double lo, hi;

  Line1D(int points, double left, double right);
  double dx() const { return (hi - lo) / n; }
  double x(int i) const { return lo + i * dx(); }
  Eigen::ArrayXd xs() const;
  Eigen::ArrayXd wavenumbers() const;  // FFT ordering
};

struct ResonantMode {
  double eta;
  cplx beta;
  cplx lambda;
  Eigen::ArrayXcd g;      // empty at eta = 0
  Eigen::ArrayXcd gstar;
};
ResonantMode make_mode(double eta, const Line1D& line);

// Linearised operator about phi_c at transverse wavenumber eta, and its adjoint,
// acting on profiles already multiplied by exp(alpha x) (resp. exp(-alpha x)).
// With alpha = 0 and eta != 0 the profile must have (numerically) zero mean.
Eigen::ArrayXcd apply_linearized(const Line1D& line, const Eigen::ArrayXcd& v, double eta, double c = 2.0,
                                 double alpha = 0.0);
Eigen::ArrayXcd apply_linearized_adjoint(const Line1D& line, const Eigen::ArrayXcd& w, double eta, double c = 2.0,
                                         double alpha = 0.0);

// Relative weighted eigen-residuals of g (against lambda(eta)) and g* (against
// lambda(-eta)). The profiles are cut off smoothly near the window edges and the
// norms are taken where the cut-off is identically one.
struct EigenResidual {
  double forward;
  double adjoint;
};
EigenResidual eigen_residual(double eta, double alpha, const Line1D& line = Line1D(2048, -40.0, 40.0));

// Pairings <g_k, g_j*> over a 1-D grid: entry (j, k).
Eigen::Matrix2d pairing_matrix(double eta, const Eigen::ArrayXd& x, double dx);

// Spectral projections for fields on a 2-D grid. The resonant band is every
// grid wavenumber with |eta| <= eta0. P0 is normalised by the inverse pairing
// matrix so it is an exact projection on the sampled problem.
class ResonantProjector {
 public:
  ResonantProjector(const Grid2D& grid, double eta0);

  const std::vector<int>& band() const { return band_; }
  double eta0() const { return eta0_; }
  const Eigen::Matrix2d& pairing(std::size_t band_pos) const { return pairings_[band_pos]; }

  RealField2D p0(const RealField2D& f) const;
  RealField2D p1(const RealField2D& f, double cutoff) const;  // keep |eta| <= cutoff
  RealField2D p2(const RealField2D& f, double cutoff) const;  // p1 - p0

  // Pairings <f_hat(., eta_m), g_k*> for each band index; rows follow band().
  Eigen::MatrixX2cd pairings_of(const RealField2D& f) const;

 private:
  Grid2D grid_;
  double eta0_;
  std::vector<int> band_;
  std::vector<Eigen::ArrayXd> g1_, g2_, g1s_, g2s_;
  std::vector<Eigen::Matrix2d> pairings_;
};

struct DecayProbe {
  double fitted_rate = 0.0;     // minus the least-squares slope of log ||w||
  double spectral_bound = 0.0;  // sup Re of the free weighted symbol over the grid
  bool growth = false;
  std::vector<double> times;
  std::vector<double> norms;
};

// Evolves w under exp(alpha x) L exp(-alpha x) (free: no soliton potential).
// The slope is fitted over the second half of [0, T].
DecayProbe semigroup_decay_probe(const RealField2D& w0, double alpha, bool with_potential, double t_end,
                                 double dt = 0.01, int samples = 40);

// exp(alpha x) P2 f: the weighted data used for the linearised probe.
RealField2D weighted_p2_data(const RealField2D& f, double alpha, double eta0, double cutoff);

}  // namespace kpline

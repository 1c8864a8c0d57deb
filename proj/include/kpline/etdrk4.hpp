#pragma once

#include <Eigen/Dense>

namespace kpline {

// Fourth-order exponential time differencing (Cox-Matthews form) for
// v' = L v + N(v) with a diagonal complex symbol L. The phi-function
// coefficients are averaged over a circle in the complex plane so that modes
// with small |hL| stay free of cancellation error.
class Etdrk4 {
 public:
  Etdrk4(const Eigen::ArrayXXcd& symbol, double h, int contour_points = 32);

  double h() const { return h_; }

  // N must map const Eigen::ArrayXXcd& -> Eigen::ArrayXXcd of the same shape.
  template <class N>
  void step(Eigen::ArrayXXcd& v, N&& nonlinear) const {
    const Eigen::ArrayXXcd nv = nonlinear(v);
    const Eigen::ArrayXXcd a = e2_ * v + q_ * nv;
    const Eigen::ArrayXXcd na = nonlinear(a);
    const Eigen::ArrayXXcd b = e2_ * v + q_ * na;
    const Eigen::ArrayXXcd nb = nonlinear(b);
    const Eigen::ArrayXXcd c = e2_ * a + q_ * (2.0 * nb - nv);
    const Eigen::ArrayXXcd nc = nonlinear(c);
    v = e_ * v + f1_ * nv + 2.0 * f2_ * (na + nb) + f3_ * nc;
  }

 private:
  double h_;
  Eigen::ArrayXXcd e_, e2_, q_, f1_, f2_, f3_;
};

}  // namespace kpline

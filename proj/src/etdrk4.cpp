#include "kpline/etdrk4.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "kpline/grid.hpp"

namespace kpline {

Etdrk4::Etdrk4(const Eigen::ArrayXXcd& symbol, double h, int contour_points) : h_(h) {
  if (!(h > 0.0)) throw InvalidArgument("etdrk4: step must be positive");
  if (contour_points < 8) throw InvalidArgument("etdrk4: need at least 8 contour points");
  const auto rows = symbol.rows();
  const auto cols = symbol.cols();
  e_.resize(rows, cols);
  e2_.resize(rows, cols);
  q_.resize(rows, cols);
  f1_.resize(rows, cols);
  f2_.resize(rows, cols);
  f3_.resize(rows, cols);

  std::vector<cplx> roots(contour_points);
  for (int j = 0; j < contour_points; ++j) roots[j] = std::polar(1.0, 2.0 * M_PI * (j + 0.5) / contour_points);

  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const cplx hl = h * symbol(r, c);
      e_(r, c) = std::exp(hl);
      e2_(r, c) = std::exp(0.5 * hl);
      // Direct evaluation loses accuracy only near z = 0; there the contour
      // mean (radius 1, so |z| >= 1/2 on it) replaces it.
      cplx q(0), a(0), b(0), d(0);
      const bool direct = std::abs(hl) >= 0.5;
      for (std::size_t j = 0; j < (direct ? 1 : roots.size()); ++j) {
        const cplx z = direct ? hl : hl + roots[j];
        const cplx ez = std::exp(z);
        const cplx z3 = z * z * z;
        q += (std::exp(0.5 * z) - 1.0) / z;
        a += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
        b += (2.0 + z + ez * (z - 2.0)) / z3;
        d += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
      }
      const double scale = direct ? h : h / contour_points;
      q_(r, c) = q * scale;
      f1_(r, c) = a * scale;
      f2_(r, c) = b * scale;
      f3_(r, c) = d * scale;
    }
  }
}

}  // namespace kpline

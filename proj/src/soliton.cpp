#include "kpline/soliton.hpp"

#include <cmath>

namespace kpline {

double soliton_dx(double x, double c) {
  const double k = std::sqrt(c / 2);
  const double s = 1.0 / std::cosh(k * x);
  return -2.0 * c * k * s * s * std::tanh(k * x);
}

double soliton_dc(double x, double c) {
  const double k = std::sqrt(c / 2);
  const double s = 1.0 / std::cosh(k * x);
  return s * s * (1.0 - k * x * std::tanh(k * x));
}

double soliton_mass(double c) { return 2.0 * std::sqrt(2.0 * c); }

double unit_bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  const double h = std::cos(0.5 * M_PI * x);
  return h * h;
}

double unit_bump_dx(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  return -0.5 * M_PI * std::sin(M_PI * x);
}

double mass_correction(double z, double c, double offset) {
  return 2.0 * (std::sqrt(2.0 * c) - 2.0) * unit_bump(z + offset);
}

RealField2D assemble_ansatz(const Grid2D& grid, const CrestProfiles& crest, double offset, const RealField2D* v) {
  if (crest.amplitude.size() != grid.ny() || crest.position.size() != grid.ny())
    throw InvalidArgument("assemble_ansatz: crest profiles must have ny entries");
  if ((crest.amplitude <= 0.0).any()) throw InvalidArgument("assemble_ansatz: amplitude must stay positive");
  RealField2D out(grid);
  for (int j = 0; j < grid.ny(); ++j) {
    const double c = crest.amplitude(j);
    const double p = crest.position(j);
    for (int i = 0; i < grid.nx(); ++i) {
      const double z = wrap_periodic(grid.x(i) - p, grid.lx());
      const double zb = wrap_periodic(grid.x(i) - p + offset, grid.lx());
      out.values(i, j) = soliton_profile(z, c) - mass_correction(zb, c, 0.0);
    }
  }
  if (v) {
    if (!v->grid.same_shape(grid)) throw InvalidArgument("assemble_ansatz: v lives on a different grid");
    out.values += shift_lines(*v, crest.position).values;
  }
  return out;
}

InitialSplit split_initial_data(const RealField2D& v0, double c0) {
  if (!(c0 > 0)) throw InvalidArgument("split_initial_data: c0 must be positive");
  const Grid2D& g = v0.grid;
  const Eigen::ArrayXd mass = line_integrals(v0);
  const Eigen::ArrayXd root = std::sqrt(c0) + mass / (2.0 * std::sqrt(2.0));
  if ((root <= 0.0).any()) throw InvalidArgument("split_initial_data: line mass too negative for a soliton");
  InitialSplit out{root.square(), v0};
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double x = g.x(i);
      out.remainder.values(i, j) += soliton_profile(x, c0) - soliton_profile(x, out.amplitude(j));
    }
  return out;
}

}  // namespace kpline

#pragma once

#include <Eigen/Dense>

#include "kpline/grid.hpp"

namespace kpline {

// Line soliton of speed 2c: amplitude c, width 1/sqrt(c/2).
template <class T>
T soliton_profile(T x, double c) {
  using std::cosh;
  using std::sqrt;
  const T s = T(1) / cosh(sqrt(c / 2) * x);
  return c * s * s;
}

double soliton_dx(double x, double c);
double soliton_dc(double x, double c);  // derivative with respect to the amplitude
double soliton_mass(double c);          // integral over the line

// Unit-mass C^1 bump supported on [-1, 1]: cos^2(pi x / 2).
double unit_bump(double x);
double unit_bump_dx(double x);
inline constexpr double kUnitBumpNormSquared = 0.75;

// Mass-correction term 2 (sqrt(2c) - 2) * bump(z + offset); it makes the line
// mass of soliton_profile(z, c) - mass_correction(z, c, offset) equal 4 for any c.
double mass_correction(double z, double c, double offset);

// Crest state sampled on the y-grid: amplitude c(y) and position (grid frame) of
// each line's crest.
struct CrestProfiles {
  Eigen::ArrayXd amplitude;
  Eigen::ArrayXd position;

  static CrestProfiles flat(int ny, double c = 2.0) {
    return {Eigen::ArrayXd::Constant(ny, c), Eigen::ArrayXd::Zero(ny)};
  }
};

// phi_{c(y)}(x - p(y)) - mass_correction(x - p(y), c(y), offset) [+ v(x - p(y), y)].
// `offset` is the trailing distance of the correction bump (L + 3t in the
// moving frame). `v`, when given, is expressed relative to the crest and is
// translated line by line. Coordinates wrap periodically.
RealField2D assemble_ansatz(const Grid2D& grid, const CrestProfiles& crest, double offset,
                            const RealField2D* v = nullptr);

// Absorbs the line masses of v0 into an amplitude profile around c0 and returns
// the zero-line-mass remainder v0 + phi_{c0} - phi_{c1}.
struct InitialSplit {
  Eigen::ArrayXd amplitude;
  RealField2D remainder;
};
InitialSplit split_initial_data(const RealField2D& v0, double c0 = 2.0);

}  // namespace kpline

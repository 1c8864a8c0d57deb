#pragma once

#include <Eigen/Dense>

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kpline/grid.hpp"

namespace kpline {

// Weighted L^2 norm with weight exp(2 alpha z), z = x - origin. The periodic
// coordinate z is read in the window [front - lx, front); the default front
// gives the centred window [-lx/2, lx/2).
double norm_X(const RealField2D& v, double alpha, double origin = 0.0,
              double front = std::numeric_limits<double>::quiet_NaN());

// ||(exp(-alpha |z| / 2) + exp(-alpha |z + 3t + L|)) v||.
double norm_W(const RealField2D& v, double alpha, double t, double offset_L, double origin = 0.0);

// Pointwise energy density 3 (w_z)^2 + 3 (d_z^{-1} w_y)^2 + 4 w^2. Requires every
// x-line of w to have zero mean (relative tolerance `mean_tol`).
Eigen::ArrayXXd energy_density(const RealField2D& w, double mean_tol = 1e-8);
// Integral of weight(x) * energy density, with the weight depending on x only.
double energy_E(const RealField2D& w, const Eigen::ArrayXd& x_weight, double mean_tol = 1e-8);

// Virial weight 1 + tanh(eps (x - centre)), x wrapped around the centre.
Eigen::ArrayXd virial_weight(const Grid2D& g, double eps, double centre);
Eigen::ArrayXd virial_weight_dx(const Grid2D& g, double eps, double centre);
double virial_I(const RealField2D& v, double eps, double centre);
// Integral of chi' {(v_x)^2 + (d_x^{-1} v_y)^2 + v^2}.
double virial_dissipation(const RealField2D& v, double eps, double centre, double mean_tol = 1e-8);

// Q(t, v) with the correction bump trailing at distance L + 3t; `amplitude` is c(y).
struct QValues {
  double q;
  double companion;  // q + 8 ||bump||^2 ||sqrt(c) - sqrt(2)||^2_{L^2(y)}
};
QValues q_functional(const RealField2D& v, const Eigen::ArrayXd& amplitude, double t, double offset_L);

// ||exp(alpha x) u||_{L^p} / (||u||_X^{3/p - 1/2} (||u_x||_X + ||d_x^{-1} u_y||_X + ||u||_X)^{3/2 - 3/p}).
double aniso_ratio(const RealField2D& u, double alpha, double p);

// Named columns with strictly increasing first column (time).
class DiagnosticsSeries {
 public:
  explicit DiagnosticsSeries(std::vector<std::string> columns);

  void append(const std::vector<double>& row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::vector<double> column(const std::string& name) const;
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& os) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace kpline

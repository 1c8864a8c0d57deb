#include <cmath>

#include "doctest.h"
#include "kpline/reduced.hpp"

using namespace kpline;

namespace {

const Grid2D& crest_grid() {
  static const Grid2D g(4, 64, 1.0, 128.0);
  return g;
}

}  // namespace

TEST_SUITE("reduced") {
  TEST_CASE("constants") {
    CHECK(modulation_constants::mu1 == doctest::Approx(0.5 - M_PI * M_PI / 12));
    CHECK(modulation_constants::mu3 == doctest::Approx(1.0 + M_PI * M_PI / 24 - 0.5));
  }

  TEST_CASE("eigenvectors diagonalise the linear matrix") {
    for (double eta : {-0.7, 0.05, 0.3, 1.0}) {
      const Dispersion d = dispersion(eta);
      Eigen::Matrix2cd lam = Eigen::Matrix2cd::Zero();
      lam(0, 0) = d.lambda_plus;
      lam(1, 1) = d.lambda_minus;
      CHECK((d.a_star * d.pi_star - d.pi_star * lam).cwiseAbs().maxCoeff() < 1e-13);
      // Both branches share the damping rate 2 eta^2.
      CHECK(d.lambda_plus.real() == doctest::Approx(-2 * eta * eta));
      CHECK(d.lambda_minus.real() == doctest::Approx(-2 * eta * eta));
    }
  }

  TEST_CASE("b transform vanishes on the flat soliton and inverts") {
    const YBand band(crest_grid(), 0.25);
    const Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(64, 2.0);
    CHECK(b_transform(band, flat).abs().maxCoeff() < 1e-14);
    const double e1 = 2 * M_PI / 128.0;
    const Eigen::ArrayXd c = 2.0 + 0.1 * (e1 * band.ys()).cos() + 0.05 * (3 * e1 * band.ys()).sin();
    const Eigen::ArrayXd b = b_transform(band, c);
    // Pointwise value before projection, for a band-limited c of small size the
    // projection only removes harmonics: the mean agrees with the pointwise mean.
    const Eigen::ArrayXd pointwise = (std::sqrt(2.0) * c.pow(1.5) - 4.0) / 3.0;
    CHECK(b.mean() == doctest::Approx(pointwise.mean()).epsilon(1e-12));
    CHECK((b_inverse(band, b) - c).abs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(b_transform(band, -flat), InvalidArgument);
  }

  TEST_CASE("spectral y-derivative") {
    const int n = 64;
    const double ly = 20.0;
    Eigen::ArrayXd y(n);
    for (int j = 0; j < n; ++j) y(j) = -ly / 2 + j * ly / n;
    const double k = 2 * M_PI * 3 / ly;
    CHECK((spectral_dy((k * y).sin(), ly) - k * (k * y).cos()).abs().maxCoeff() < 1e-12);
    CHECK((spectral_dy((k * y).sin(), ly, 2) + k * k * (k * y).sin()).abs().maxCoeff() < 1e-11);
  }

  TEST_CASE("modulation round trip through crest variables") {
    const YBand band(crest_grid(), 0.25);
    const ReducedModel model(band, 0.01);
    const double e1 = 2 * M_PI / 128.0;
    const Eigen::ArrayXd c = 2.0 + 0.05 * (e1 * band.ys()).cos();
    const Eigen::ArrayXd x = 0.4 * (2 * e1 * band.ys()).sin();
    const ReducedModel::Physical p = model.to_physical(model.from_modulation(c, x, 0.0));
    CHECK((p.c - c).abs().maxCoeff() < 1e-12);
    CHECK((p.x_y - 0.8 * e1 * (2 * e1 * band.ys()).cos()).abs().maxCoeff() < 1e-13);
  }

  TEST_CASE("linear crest modes damp at rate 2 eta^2") {
    const YBand band(crest_grid(), 0.25);
    const ReducedModel model(band, 0.01, false);
    const double e1 = 2 * M_PI / 128.0;
    const Eigen::ArrayXd wave = 1e-3 * (2 * e1 * band.ys()).cos();
    CrestState s = model.from_profiles(wave, Eigen::ArrayXd::Zero(64), 0.0);
    const double before = std::abs(s.coeffs(2, 0));
    model.evolve(s, 5.0);
    CHECK(s.t == doctest::Approx(5.0));
    const double eta = 2 * e1;
    CHECK(std::abs(s.coeffs(2, 0)) == doctest::Approx(before * std::exp(-2 * eta * eta * 5.0)).epsilon(1e-10));
    CHECK(std::abs(s.coeffs(2, 1)) < 1e-15);
  }

  TEST_CASE("flat crest is a fixed point of the nonlinear model") {
    const YBand band(crest_grid(), 0.25);
    const ReducedModel model(band, 0.05);
    CrestState s = model.from_modulation(Eigen::ArrayXd::Constant(64, 2.0), Eigen::ArrayXd::Zero(64), 0.0);
    model.evolve(s, 2.0);
    CHECK(s.coeffs.abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("compare rows") {
    const Eigen::ArrayXd a = Eigen::ArrayXd::Constant(4, 2.0), b = Eigen::ArrayXd::Constant(4, 2.5);
    const auto rows = compare({{0.0, a, a}, {1.0, a, a}}, {{0.0, a, a}, {1.0, b, a}}, 0.25);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].err_c_l2 == 0.0);
    CHECK(rows[1].err_c_l2 == doctest::Approx(0.5));
    CHECK(rows[1].err_c_sup == doctest::Approx(0.5));
    CHECK_THROWS_AS(compare({{0.0, a, a}}, {{0.5, a, a}}, 0.25), InvalidArgument);
    CHECK(compare_series(rows).columns().at(1) == "err_c_l2");
  }
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "kpline/grid.hpp"

using namespace kpline;

namespace {

RealField2D random_field(const Grid2D& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  RealField2D f(g);
  for (Eigen::Index k = 0; k < f.values.size(); ++k) f.values(k) = normal(rng);
  return f;
}

double max_diff(const RealField2D& a, const RealField2D& b) { return (a.values - b.values).abs().maxCoeff(); }

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("coordinates cover the periodic box") {
    const Grid2D g(16, 8, 4.0, 2.0);
    CHECK(g.x(0) == doctest::Approx(-2.0));
    CHECK(g.y(0) == doctest::Approx(-1.0));
    CHECK(g.dx() == doctest::Approx(0.25));
    CHECK(g.xi()(1) == doctest::Approx(2 * M_PI / 4.0));
    CHECK(g.eta()(g.ny() - 1) == doctest::Approx(-2 * M_PI / 2.0));
    CHECK(g.eta()(g.ny() / 2) > 0.0);
  }

  TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(Grid2D(15, 8, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Grid2D(16, 8, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(Grid2D(16, 8, 1.0, INFINITY), InvalidArgument);
  }

  TEST_CASE("forward and inverse transforms round trip") {
    const Grid2D g(32, 16, 10.0, 6.0);
    const RealField2D f = random_field(g, 3);
    CHECK(max_diff(inverse(forward(f)), f) < 1e-13);
  }

  TEST_CASE("zero coefficient is the mean and Parseval holds") {
    const Grid2D g(32, 16, 10.0, 6.0);
    const RealField2D f = random_field(g, 5);
    const Spectrum2D s = forward(f);
    CHECK(std::abs(s.coeffs(0, 0) - cplx(f.values.mean())) < 1e-14);
    const double direct = std::sqrt((f.values.square()).sum() * g.dx() * g.dy());
    CHECK(l2_norm(s) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(l2_norm(f) == doctest::Approx(direct).epsilon(1e-12));
  }

  TEST_CASE("spectral derivatives match trigonometric derivatives") {
    const Grid2D g(64, 32, 2 * M_PI * 3, 2 * M_PI * 2);
    // f = sin(2x/3) cos(y), periodic on both axes.
    const RealField2D f = RealField2D::sample(g, [](double x, double y) { return std::sin(2 * x / 3) * std::cos(y); });
    const RealField2D fx = RealField2D::sample(g, [](double x, double y) { return 2.0 / 3 * std::cos(2 * x / 3) * std::cos(y); });
    const RealField2D fyy = RealField2D::sample(g, [](double x, double y) { return -std::sin(2 * x / 3) * std::cos(y); });
    const RealField2D fxxx =
        RealField2D::sample(g, [](double x, double y) { return -8.0 / 27 * std::cos(2 * x / 3) * std::cos(y); });
    CHECK(max_diff(inverse(deriv_x(forward(f))), fx) < 1e-12);
    CHECK(max_diff(inverse(deriv_x(forward(f), 3)), fxxx) < 1e-12);
    CHECK(max_diff(inverse(deriv_y(forward(f), 2)), fyy) < 1e-12);
  }

  TEST_CASE("x antiderivative inverts the derivative on zero-mean lines") {
    const Grid2D g(64, 8, 12.0, 5.0);
    const RealField2D f = RealField2D::sample(g, [&](double x, double y) {
      return std::cos(2 * M_PI * x / 12.0) * (1 + std::sin(2 * M_PI * y / 5.0)) + 1.5;
    });
    const RealField2D back = inverse(antideriv_x(deriv_x(forward(f))));
    RealField2D expect = f;
    expect.values -= 1.5;
    CHECK(max_diff(back, expect) < 1e-12);
  }

  TEST_CASE("line shifts translate each line exactly") {
    const Grid2D g(64, 4, 8.0, 4.0);
    const double k = 2 * M_PI / 8.0;
    const RealField2D f = RealField2D::sample(g, [&](double x, double) { return std::sin(k * x) + 0.3 * std::cos(3 * k * x); });
    Eigen::ArrayXd shift(4);
    shift << 0.1, -0.7, 1.3, 2.9;
    const RealField2D moved = shift_lines(f, shift);
    RealField2D expect(g);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double x = g.x(i) - shift(j);
        expect.values(i, j) = std::sin(k * x) + 0.3 * std::cos(3 * k * x);
      }
    CHECK(max_diff(moved, expect) < 1e-12);
  }

  TEST_CASE("integrals and norms of trigonometric data") {
    const Grid2D g(32, 16, 6.0, 4.0);
    const RealField2D f = RealField2D::sample(g, [](double x, double) { return std::cos(2 * M_PI * x / 6.0); });
    CHECK(integrate(f) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(l2_norm(f) == doctest::Approx(std::sqrt(6.0 * 4.0 / 2)).epsilon(1e-12));
    // sup norm as the limit of Lp norms is not needed; check L4 directly: mean of cos^4 is 3/8.
    CHECK(lp_norm(f, 4.0) == doctest::Approx(std::pow(24.0 * 3.0 / 8.0, 0.25)).epsilon(1e-12));
    const Eigen::ArrayXd lines = line_integrals(RealField2D::sample(g, [](double, double y) { return y; }));
    CHECK(lines(0) == doctest::Approx(-2.0 * 6.0));
  }

  TEST_CASE("dealiasing keeps two thirds of each axis") {
    const Grid2D g(48, 24, 1.0, 1.0);
    const auto mask = dealias_mask(g);
    CHECK(mask(0, 0));
    CHECK_FALSE(mask(g.nxh() - 1, 0));
    CHECK_FALSE(mask(0, g.ny() / 2));
    CHECK(mask(15, 7));
    CHECK_FALSE(mask(17, 0));
  }

  TEST_CASE("periodic wrapping") {
    CHECK(wrap_periodic(0.6, 1.0) == doctest::Approx(-0.4));
    CHECK(wrap_periodic(-0.5, 1.0) == doctest::Approx(-0.5));
    CHECK(wrap_periodic(7.25, 2.0) == doctest::Approx(-0.75));
  }
}

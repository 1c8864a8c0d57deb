#include <cmath>
#include <sstream>

#include "doctest.h"
#include "kpline/diagnostics.hpp"
#include "kpline/soliton.hpp"

using namespace kpline;

TEST_SUITE("diagnostics") {
  TEST_CASE("weighted norm of a Gaussian") {
    // int exp(2 a x) exp(-2 (x - x0)^2) dx = sqrt(pi / 2) exp(2 a x0 + a^2 / 2).
    const Grid2D g(512, 4, 64.0, 8.0);
    const double a = 0.5, x0 = 1.5;
    const RealField2D v = RealField2D::sample(g, [&](double x, double) { return std::exp(-(x - x0) * (x - x0)); });
    const double exact = std::sqrt(8.0 * std::sqrt(M_PI / 2) * std::exp(2 * a * x0 + a * a / 2));
    CHECK(norm_X(v, a) == doctest::Approx(exact).epsilon(1e-12));
    // Measured from origin x0 the weight loses the exp(2 a x0) factor.
    CHECK(norm_X(v, a, x0) == doctest::Approx(exact * std::exp(-a * x0)).epsilon(1e-12));
    // A front at 5 ahead of the origin does not cut the Gaussian either.
    CHECK(norm_X(v, a, 0.0, 5.0) == doctest::Approx(exact).epsilon(1e-9));
  }

  TEST_CASE("front window decides where wrapped mass is counted") {
    const Grid2D g(256, 4, 40.0, 8.0);
    // Mass near x = 18: centred window reads it at z = 18, a front at 5 reads it at z = -22.
    const RealField2D v = RealField2D::sample(g, [](double x, double) { return std::exp(-4 * (x - 18) * (x - 18)); });
    const double centred = norm_X(v, 0.5), fronted = norm_X(v, 0.5, 0.0, 5.0);
    CHECK(fronted / centred == doctest::Approx(std::exp(-0.5 * 40.0)).epsilon(1e-8));
  }

  TEST_CASE("W norm weights near the crest and the trailing bump") {
    const Grid2D g(512, 4, 128.0, 8.0);
    // Unit values at x = -0.25, 0, 0.25 (dx = 0.25) on every line.
    const RealField2D one = RealField2D::sample(g, [](double x, double) { return std::abs(x) < 0.3 ? 1.0 : 0.0; });
    double acc = 0.0;
    for (double z : {-0.25, 0.0, 0.25}) {
      const double w = std::exp(-0.25 * std::abs(z)) + std::exp(-0.5 * std::abs(z + 20.0));
      acc += w * w;
    }
    CHECK(norm_W(one, 0.5, 0.0, 20.0) == doctest::Approx(std::sqrt(acc * 0.25 * 8.0)).epsilon(1e-12));
    // At t = 4 the trailing bump sits at z = -32 and dominates there.
    const RealField2D far = RealField2D::sample(g, [](double x, double) { return std::abs(x + 32.0) < 0.1 ? 1.0 : 0.0; });
    const double wf = std::exp(-0.25 * 32.0) + 1.0;
    CHECK(norm_W(far, 0.5, 4.0, 20.0) == doctest::Approx(wf * std::sqrt(0.25 * 8.0)).epsilon(1e-12));
  }

  TEST_CASE("energy density of a y-independent wave") {
    const Grid2D g(128, 4, 2 * M_PI, 8.0);
    const RealField2D w = RealField2D::sample(g, [](double x, double) { return std::sin(x); });
    const Eigen::ArrayXXd e = energy_density(w);
    for (int i = 0; i < g.nx(); i += 17) {
      const double x = g.x(i);
      CHECK(e(i, 1) == doctest::Approx(3 * std::cos(x) * std::cos(x) + 4 * std::sin(x) * std::sin(x)).epsilon(1e-12));
    }
    // Uniform weight: E = 2 pi * 8 * (3 / 2 + 4 / 2).
    CHECK(energy_E(w, Eigen::ArrayXd::Ones(g.nx())) == doctest::Approx(2 * M_PI * 8 * 3.5).epsilon(1e-12));
  }

  TEST_CASE("energy requires zero line means") {
    const Grid2D g(64, 4, 10.0, 8.0);
    const RealField2D w = RealField2D::sample(g, [](double x, double) { return 1.0 + std::sin(2 * M_PI * x / 10); });
    CHECK_THROWS_AS(energy_density(w), InvalidArgument);
  }

  TEST_CASE("virial weight and functional") {
    const Grid2D g(256, 4, 64.0, 8.0);
    const Eigen::ArrayXd chi = virial_weight(g, 0.1, 3.0);
    const Eigen::ArrayXd dchi = virial_weight_dx(g, 0.1, 3.0);
    for (int i : {40, 100, 200}) {
      const double x = g.x(i);
      CHECK(chi(i) == doctest::Approx(1 + std::tanh(0.1 * (x - 3))));
      const double h = 1e-6;
      CHECK(dchi(i) == doctest::Approx((std::tanh(0.1 * (x + h - 3)) - std::tanh(0.1 * (x - h - 3))) / (2 * h)).epsilon(1e-7));
    }
    const RealField2D v = RealField2D::sample(g, [](double x, double) { return std::exp(-x * x); });
    double direct = 0.0;
    for (int i = 0; i < g.nx(); ++i) direct += chi(i) * std::exp(-2 * g.x(i) * g.x(i));
    CHECK(virial_I(v, 0.1, 3.0) == doctest::Approx(direct * g.dx() * 8.0).epsilon(1e-12));
    const RealField2D w = RealField2D::sample(g, [](double x, double) { return -2 * x * std::exp(-x * x); });
    CHECK(virial_dissipation(w, 0.1, 3.0) > 0.0);
  }

  TEST_CASE("Q functional and its companion") {
    const Grid2D g(256, 8, 64.0, 16.0);
    const RealField2D zero(g);
    const Eigen::ArrayXd c = Eigen::ArrayXd::Constant(8, 2.0);
    const QValues flat = q_functional(zero, c, 0.0, 20.0);
    CHECK(flat.q == 0.0);
    CHECK(flat.companion == 0.0);
    const Eigen::ArrayXd c2 = Eigen::ArrayXd::Constant(8, 2.42);
    const QValues shifted = q_functional(zero, c2, 0.0, 20.0);
    const double drift = std::pow(std::sqrt(2.42) - std::sqrt(2.0), 2) * 16.0;
    CHECK(shifted.companion == doctest::Approx(8 * 0.75 * drift));
  }

  TEST_CASE("anisotropic ratio is scale invariant") {
    const Grid2D g(256, 32, 64.0, 32.0);
    const RealField2D u = RealField2D::sample(g, [](double x, double y) {
      return -2 * x * std::exp(-x * x - y * y / 16);
    });
    RealField2D u3 = u;
    u3.values *= 3.0;
    const double r = aniso_ratio(u, 0.5, 4.0);
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
    CHECK(aniso_ratio(u3, 0.5, 4.0) == doctest::Approx(r).epsilon(1e-12));
  }

  TEST_CASE("series enforce increasing time and write CSV") {
    DiagnosticsSeries s({"t", "a"});
    s.append({0.0, 1.5});
    s.append({0.5, 2.0});
    CHECK_THROWS_AS(s.append({0.5, 3.0}), InvalidArgument);
    CHECK_THROWS_AS(s.append({1.0}), InvalidArgument);
    std::ostringstream os;
    s.write_csv(os);
    CHECK(os.str().substr(0, 4) == "t,a\n");
    CHECK(s.column("a") == std::vector<double>{1.5, 2.0});
  }
}

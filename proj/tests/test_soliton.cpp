#include <cmath>

#include "doctest.h"
#include "kpline/initial_data.hpp"
#include "kpline/soliton.hpp"

using namespace kpline;

namespace {

// Composite Simpson rule on [a, b] with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("soliton") {
  TEST_CASE("profile is c sech^2 of the scaled coordinate") {
    for (double c : {0.5, 2.0, 3.7}) {
      for (double x : {-3.0, -0.2, 0.0, 1.1, 6.0}) {
        const double s = 1.0 / std::cosh(std::sqrt(c / 2.0) * x);
        CHECK(soliton_profile(x, c) == doctest::Approx(c * s * s).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("profile solves the travelling-wave ODE") {
    // Integrated once: -2c phi + phi'' + 3 phi^2 = 0 for the speed-2c wave.
    const double c = 1.6, h = 1e-3;
    for (double x : {-2.0, -0.5, 0.3, 1.7}) {
      const double p = soliton_profile(x, c);
      const double pxx = (soliton_profile(x + h, c) - 2 * p + soliton_profile(x - h, c)) / (h * h);
      CHECK(std::abs(-2 * c * p + pxx + 3 * p * p) < 1e-5);
    }
  }

  TEST_CASE("derivatives agree with central differences") {
    const double h = 1e-6;
    for (double x : {-1.3, 0.0, 0.8}) {
      const double c = 2.3;
      CHECK(soliton_dx(x, c) == doctest::Approx((soliton_profile(x + h, c) - soliton_profile(x - h, c)) / (2 * h)).epsilon(1e-7));
      CHECK(soliton_dc(x, c) == doctest::Approx((soliton_profile(x, c + h) - soliton_profile(x, c - h)) / (2 * h)).epsilon(1e-7));
    }
  }

  TEST_CASE("mass by quadrature") {
    for (double c : {0.5, 2.0, 4.0})
      CHECK(soliton_mass(c) == doctest::Approx(simpson([&](double x) { return soliton_profile(x, c); }, -60, 60)).epsilon(1e-10));
  }

  TEST_CASE("unit bump has unit mass and the stated norm") {
    CHECK(simpson(unit_bump, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(simpson([](double x) { return unit_bump(x) * unit_bump(x); }, -1.0, 1.0) ==
          doctest::Approx(kUnitBumpNormSquared).epsilon(1e-12));
    CHECK(unit_bump(1.5) == 0.0);
    CHECK(unit_bump_dx(0.5) == doctest::Approx(-M_PI / 2 * std::sin(M_PI * 0.5)).epsilon(1e-12));
  }

  TEST_CASE("mass correction keeps the line mass at 4") {
    for (double c : {1.5, 2.0, 2.6}) {
      const double m = simpson([&](double z) { return soliton_profile(z, c) - mass_correction(z, c, 20.0); }, -60, 60, 60000);
      CHECK(m == doctest::Approx(4.0).epsilon(1e-9));
    }
  }

  TEST_CASE("flat ansatz is the bare soliton") {
    const Grid2D g(256, 4, 64.0, 8.0);
    const RealField2D u = assemble_ansatz(g, CrestProfiles::flat(g.ny()), 20.0);
    double err = 0.0;
    for (int i = 0; i < g.nx(); ++i) err = std::max(err, std::abs(u.values(i, 2) - soliton_profile(g.x(i), 2.0)));
    CHECK(err < 1e-14);
  }

  TEST_CASE("initial split leaves zero line mass in the remainder") {
    const Grid2D g(256, 8, 64.0, 16.0);
    const RealField2D v0 = RealField2D::sample(g, [](double x, double y) {
      return 0.05 * std::exp(-x * x / 4.0) * (1.0 + std::cos(2 * M_PI * y / 16.0));
    });
    const InitialSplit split = split_initial_data(v0);
    CHECK(line_integrals(split.remainder).abs().maxCoeff() < 1e-10);
    CHECK((split.amplitude > 2.0).all());
  }

  TEST_CASE("perturbation kinds") {
    CHECK(parse_perturbation_kind("dx_gaussian") == PerturbationKind::dx_gaussian);
    CHECK(to_string(PerturbationKind::crest) == "crest");
    CHECK_THROWS(parse_perturbation_kind("bogus"));
    const Grid2D g(128, 8, 64.0, 32.0);
    PerturbationSpec spec;
    spec.kind = PerturbationKind::dx_gaussian;
    spec.amplitude = 0.01;
    const InitialData d = make_initial_data(g, spec, 20.0, 0.25);
    // An x-derivative carries no line mass.
    CHECK(line_integrals(d.free0).abs().maxCoeff() < 1e-12);
  }
}

#include <cmath>

#include "doctest.h"
#include "kpline/kp2.hpp"
#include "kpline/soliton.hpp"

using namespace kpline;

TEST_SUITE("kp2") {
  TEST_CASE("linear symbol") {
    const cplx i(0, 1);
    CHECK(std::abs(linear_symbol(0.5, 0.2, 4.0) - i * (0.125 + 2.0 - 3 * 0.04 / 0.5)) < 1e-15);
    CHECK(linear_symbol(0.0, 1.0, 4.0) == cplx(0.0));
    CHECK(linear_symbol(-0.3, 0.0, 0.0).real() == 0.0);
  }

  TEST_CASE("ETDRK4 reproduces an exponential with constant forcing") {
    // v' = -v + 1, v(0) = 3: v(t) = 1 + 2 exp(-t).
    Eigen::ArrayXXcd sym(1, 1);
    sym(0, 0) = -1.0;
    const Etdrk4 scheme(sym, 0.1);
    Eigen::ArrayXXcd v(1, 1);
    v(0, 0) = 3.0;
    for (int n = 0; n < 10; ++n)
      scheme.step(v, [](const Eigen::ArrayXXcd& a) { return Eigen::ArrayXXcd::Ones(a.rows(), a.cols()).eval(); });
    CHECK(std::abs(v(0, 0) - cplx(1.0 + 2.0 * std::exp(-1.0))) < 1e-13);
  }

  TEST_CASE("ETDRK4 converges at fourth order on the logistic equation") {
    // v' = v - v^2, v(0) = 0.1: v(t) = 1 / (1 + 9 exp(-t)).
    auto error_for = [](int steps) {
      Eigen::ArrayXXcd sym(1, 1);
      sym(0, 0) = 1.0;
      const Etdrk4 scheme(sym, 2.0 / steps);
      Eigen::ArrayXXcd v(1, 1);
      v(0, 0) = 0.1;
      for (int n = 0; n < steps; ++n) scheme.step(v, [](const Eigen::ArrayXXcd& a) { return (-a * a).eval(); });
      return std::abs(v(0, 0) - cplx(1.0 / (1.0 + 9.0 * std::exp(-2.0))));
    };
    const double ratio = error_for(20) / error_for(40);
    CHECK(ratio > 13.0);
    CHECK(ratio < 19.0);
  }

  TEST_CASE("small Fourier mode follows the linear propagator") {
    const Grid2D g(32, 8, 2 * M_PI * 4, 2 * M_PI * 2);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.frame_speed = 1.0;
    cfg.dealias = false;
    KpStepper stepper(g, cfg);
    const double amp = 1e-9;
    const RealField2D u0 = RealField2D::sample(g, [&](double x, double y) { return amp * std::cos(x / 4 * 3 + y / 2); });
    stepper.set_reference_amplitude(amp);
    EvolutionState s{forward(u0), 0};
    for (int n = 0; n < 100; ++n) stepper.step(s);
    // Mode (k=3, m=1): coefficient amp/2 times exp(symbol t).
    const cplx expected = 0.5 * amp * std::exp(linear_symbol(0.75, 0.5, 1.0) * 1.0);
    CHECK(std::abs(s.spectrum.coeffs(3, 1) - expected) < 1e-12 * amp);
  }

  TEST_CASE("line soliton is steady in the comoving frame") {
    const Grid2D g(256, 4, 64.0, 8.0);
    SolverConfig cfg;
    cfg.dt = 0.005;
    cfg.dealias = false;
    KpStepper stepper(g, cfg);
    const RealField2D u0 = RealField2D::sample(g, [](double x, double) { return soliton_profile(x, 2.0); });
    stepper.set_reference_amplitude(2.0);
    const EvolutionState end = evolve(stepper, {forward(u0), 0}, 0.5, 1000, {}, false);
    CHECK(end.step == 100);
    CHECK((inverse(end.spectrum).values - u0.values).abs().maxCoeff() < 1e-7);
  }

  TEST_CASE("snapshot callback fires at the requested steps") {
    const Grid2D g(64, 4, 32.0, 8.0);
    SolverConfig cfg;
    cfg.dt = 0.01;
    KpStepper stepper(g, cfg);
    stepper.set_reference_amplitude(2.0);
    std::vector<long> steps;
    const RealField2D u0 = RealField2D::sample(g, [](double x, double) { return soliton_profile(x, 2.0); });
    evolve(stepper, {forward(u0), 0}, 0.25, 10, [&](const EvolutionState& s, const RealField2D&, const RunRecord& r) {
      steps.push_back(s.step);
      CHECK(r.t == doctest::Approx(s.step * 0.01));
    });
    CHECK(steps == std::vector<long>{0, 10, 20, 25});
    CHECK(steps_for(0.25, 0.01) == 25);
  }

  TEST_CASE("line means are invariant without an absorbing layer") {
    const Grid2D g(64, 8, 32.0, 16.0);
    SolverConfig cfg;
    cfg.dt = 0.01;
    KpStepper stepper(g, cfg);
    const RealField2D u0 = RealField2D::sample(g, [](double x, double y) {
      return soliton_profile(x, 2.0) + 0.1 * std::exp(-(x - 3) * (x - 3)) * std::cos(2 * M_PI * y / 16);
    });
    stepper.set_reference_amplitude(u0.values.abs().maxCoeff());
    EvolutionState s{forward(u0), 0};
    const Eigen::ArrayXcd before = s.spectrum.coeffs.row(0).transpose();
    for (int n = 0; n < 50; ++n) stepper.step(s);
    CHECK((s.spectrum.coeffs.row(0).transpose() - before).abs().maxCoeff() < 1e-15);
  }

  TEST_CASE("blow-up guard halts with the last good state") {
    const Grid2D g(64, 4, 32.0, 8.0);
    SolverConfig cfg;
    cfg.dt = 0.01;
    cfg.blowup_factor = 1.5;
    KpStepper stepper(g, cfg);
    stepper.set_reference_amplitude(0.5);  // the soliton peak (2) already exceeds 1.5 * 0.5
    EvolutionState s{forward(RealField2D::sample(g, [](double x, double) { return soliton_profile(x, 2.0); })), 0};
    try {
      stepper.step(s);
      FAIL("expected NumericHalt");
    } catch (const NumericHalt& halt) {
      CHECK(halt.state.step == 0);
    }
  }

  TEST_CASE("solver settings are validated") {
    SolverConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.dt = 0.01;
    cfg.blowup_factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }
}

#include <cmath>

#include "doctest.h"
#include "kpline/decomp.hpp"
#include "kpline/soliton.hpp"

using namespace kpline;

namespace {

const Grid2D& test_grid() {
  static const Grid2D g(256, 16, 96.0, 64.0);
  return g;
}

ModulationState flat(int ny) { return {Eigen::ArrayXd::Constant(ny, 2.0), Eigen::ArrayXd::Zero(ny), 0.0}; }

}  // namespace

TEST_SUITE("decomp") {
  TEST_CASE("band coordinates of a trigonometric profile") {
    const Grid2D& g = test_grid();
    const YBand band(g, 0.25);
    CHECK(band.highest() == 2);
    CHECK(band.dimension() == 5);
    const double e1 = 2 * M_PI / 64.0;
    const Eigen::ArrayXd f = 0.5 + (e1 * band.ys()).cos() * 0.2 - 0.3 * (2 * e1 * band.ys()).sin();
    const Eigen::VectorXd c = band.analyze(f);
    // [Re f0, Re f1, Im f1, Re f2, Im f2] with f_m the normalised DFT coefficient.
    CHECK(c(0) == doctest::Approx(0.5));
    CHECK(c(1) == doctest::Approx(0.1));
    CHECK(c(2) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(c(4) == doctest::Approx(0.15));
    CHECK((band.synthesize(c) - f).abs().maxCoeff() < 1e-14);
    CHECK(band.leakage(f) < 1e-14);
    const Eigen::ArrayXd out_of_band = (5 * e1 * band.ys()).cos();
    CHECK(band.leakage(out_of_band) == doctest::Approx(1.0));
    CHECK((band.derivative(f) - (-0.2 * e1 * (e1 * band.ys()).sin() - 0.6 * e1 * (2 * e1 * band.ys()).cos())).abs().maxCoeff() <
          1e-14);
  }

  TEST_CASE("exact modulated soliton is recovered") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    const double e1 = 2 * M_PI / 64.0;
    const Eigen::ArrayXd ys = g.ys();
    const Eigen::ArrayXd c = 2.0 + 0.04 * (e1 * ys).cos() - 0.02 * (2 * e1 * ys).sin();
    const Eigen::ArrayXd x = 0.3 - 0.05 * (e1 * ys).sin();
    const RealField2D u = assemble_ansatz(g, {c, x}, dec.options().offset_L);
    ModulationState guess = flat(g.ny());
    guess.x.setConstant(0.3);  // warm start near the crest, as when tracking
    const SplitState s = dec.decompose(u, 0.0, nullptr, guess);
    CHECK((s.mod.c - c).abs().maxCoeff() < 1e-8);
    CHECK((s.mod.x - x).abs().maxCoeff() < 1e-8);
    CHECK(s.residual < 1e-10);
    CHECK(l2_norm(s.v2) < 1e-7);
  }

  TEST_CASE("remainder of the ansatz itself vanishes") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    const RealField2D u = assemble_ansatz(g, CrestProfiles::flat(g.ny()), dec.options().offset_L);
    const RealField2D r = dec.remainder(u, Eigen::ArrayXd::Constant(g.ny(), 2.0), Eigen::ArrayXd::Zero(g.ny()), 0.0);
    CHECK(r.values.abs().maxCoeff() < 1e-12);
    const Eigen::VectorXd f = dec.residual(u, dec.pack(flat(g.ny())), 0.0);
    CHECK(f.lpNorm<Eigen::Infinity>() < 1e-10);
  }

  TEST_CASE("pack and unpack are inverse on band-limited profiles") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    const double e1 = 2 * M_PI / 64.0;
    ModulationState m{2.0 + 0.1 * (e1 * g.ys()).cos(), 0.2 * (2 * e1 * g.ys()).sin(), 0.0};
    const ModulationState back = dec.unpack(dec.pack(m), 0.0);
    CHECK((back.c - m.c).abs().maxCoeff() < 1e-13);
    CHECK((back.x - m.x).abs().maxCoeff() < 1e-13);
  }

  TEST_CASE("Jacobian matches finite differences") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    const double e1 = 2 * M_PI / 64.0;
    const RealField2D u = assemble_ansatz(g, {2.0 + 0.05 * (e1 * g.ys()).sin(), 0.1 * (e1 * g.ys()).cos()}, 20.0);
    const Eigen::VectorXd p = dec.pack(flat(g.ny()));
    const Eigen::MatrixXd jac = dec.jacobian(u, p, 0.0);
    const double h = 1e-5;
    for (int k = 0; k < p.size(); ++k) {
      Eigen::VectorXd up = p, dn = p;
      up(k) += h;
      dn(k) -= h;
      const Eigen::VectorXd col = (dec.residual(u, up, 0.0) - dec.residual(u, dn, 0.0)) / (2 * h);
      CHECK((col - jac.col(k)).lpNorm<Eigen::Infinity>() < 1e-6 * std::max(1.0, col.lpNorm<Eigen::Infinity>()));
    }
  }

  TEST_CASE("large data breaches the smallness threshold") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    RealField2D u = assemble_ansatz(g, CrestProfiles::flat(g.ny()), 20.0);
    u.values += RealField2D::sample(g, [](double x, double) { return 3.0 * std::exp(-(x - 4) * (x - 4)); }).values;
    CHECK_THROWS_AS(dec.decompose(u, 0.0, nullptr, flat(g.ny())), DecompositionError);
  }

  TEST_CASE("tracking stops cleanly at the first failure") {
    const Grid2D& g = test_grid();
    const Decomposer dec(g, DecompositionOptions{});
    int served = 0;
    const RealField2D good = assemble_ansatz(g, CrestProfiles::flat(g.ny()), 20.0);
    RealField2D bad = good;
    bad.values += 3.0;
    const TrackResult r = track(dec, [&]() -> std::optional<TrackFrame> {
      ++served;
      if (served > 3) return std::nullopt;
      return TrackFrame{0.0, served == 3 ? bad : good, std::nullopt};
    }, {}, true);
    CHECK(r.aborted);
    CHECK(r.states.size() == 2);
    CHECK_FALSE(r.reason.empty());
  }
}

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <unistd.h>

#include "doctest.h"
#include "kpline/config.hpp"
#include "kpline/io.hpp"
#include "kpline/soliton.hpp"

using namespace kpline;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("kpline-io-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::string config_error_key(const std::string& text) {
  try {
    validate(parse_config(text));
  } catch (const ConfigError& e) {
    return e.key;
  }
  return "";
}

}  // namespace

TEST_SUITE("io_config") {
  TEST_CASE("parse dotted keys with comments") {
    const RunConfig c = parse_config(
        "# desk run\n"
        "grid.nx = 256\n"
        "physics.c0=1.5   # rescaled internally\n"
        "\n"
        "solver.frame_speed = lab\n"
        "perturbation.kind = random_dx\n"
        "experiment.name = demo\n");
    CHECK(c.grid.nx == 256);
    CHECK(c.physics.c0 == 1.5);
    CHECK_FALSE(c.solver.comoving);
    CHECK(c.solver.frame_speed == 0.0);
    CHECK(c.perturbation.kind == PerturbationKind::random_dx);
    CHECK(c.experiment.name == "demo");
  }

  TEST_CASE("malformed input names the key and the line") {
    try {
      parse_config("grid.nx=64\ngrid.ny=many\n", "demo.cfg");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key == "grid.ny");
      CHECK(std::string(e.what()).find("demo.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("grid.unknown=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
  }

  TEST_CASE("validation reports the offending field") {
    CHECK(config_error_key("grid.nx=100\n") == "grid.nx");
    CHECK(config_error_key("physics.model=kp1\n") == "physics.model");
    CHECK(config_error_key("physics.alpha=2.5\n") == "physics.alpha");
    CHECK(config_error_key("physics.eta0=0.01\n") == "physics.eta0");
    CHECK(config_error_key("physics.L=70\n") == "physics.L");
    CHECK(config_error_key("solver.dt=-1\n") == "solver.dt");
    CHECK(config_error_key("") == "");
  }

  TEST_CASE("text form round trips") {
    RunConfig c;
    c.grid.lx = 100.5;
    c.solver.dt = 0.003;
    c.perturbation.seed = 99;
    c.reduced.nonlinear = false;
    const RunConfig back = parse_config(c.to_text());
    CHECK(back.entries() == c.entries());
  }

  TEST_CASE("environment overrides") {
    CHECK(env_name_for("grid.nx") == "KPLINE_GRID_NX");
    CHECK(env_name_for("physics.L") == "KPLINE_PHYSICS_L");
    std::map<std::string, std::string> env{{"KPLINE_GRID_NX", "1024"}, {"KPLINE_SOLVER_T_END", "3.5"}};
    RunConfig c;
    apply_env_overrides(c, [&](const char* name) -> const char* {
      auto it = env.find(name);
      return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(c.grid.nx == 1024);
    CHECK(c.solver.t_end == 3.5);
    CHECK(c.grid.ny == 32);
  }

  TEST_CASE("scaling maps a soliton of amplitude c0 to amplitude 2") {
    for (double c0 : {0.5, 2.0, 8.0}) {
      const Scaling s = Scaling::for_amplitude(c0);
      CHECK(s.field_in(c0) == doctest::Approx(2.0));
      // u(t, x) = phi_c0(x - 2 c0 t) becomes phi_2(X - 4 T) in scaled variables.
      const double t = 0.7, x = 1.3;
      const double lhs = s.field_in(soliton_profile(s.x_out(x) - 2 * c0 * s.time_out(t), c0));
      CHECK(lhs == doctest::Approx(soliton_profile(x - 4 * t, 2.0)).epsilon(1e-12));
      CHECK(s.time_in(s.time_out(t)) == doctest::Approx(t));
      CHECK(s.y_in(s.y_out(x)) == doctest::Approx(x));
    }
  }

  TEST_CASE("internal configuration of a rescaled run") {
    RunConfig c;
    c.physics.c0 = 8.0;  // lambda = 1/2
    c.grid.lx = 64.0;
    c.grid.ly = 16.0;
    c.physics.offset_L = 10.0;
    c.physics.eta0 = 1.0;
    c.solver.sponge_width = 12.0;
    c.decomposition.seam_width = 4.0;
    const RunConfig in = to_internal(c);
    CHECK(in.physics.c0 == 2.0);
    CHECK(in.grid.lx == doctest::Approx(128.0));
    CHECK(in.grid.ly == doctest::Approx(64.0));
    CHECK(in.physics.eta0 == doctest::Approx(0.25));
    CHECK(in.solver.dt == doctest::Approx(0.08));
    CHECK(solver_config(in).frame_speed == 4.0);
  }

  TEST_CASE("snapshot round trip with layout and scale") {
    TempDir tmp;
    const Grid2D g(8, 4, 2.0, 1.0);
    const RealField2D f = RealField2D::sample(g, [](double x, double y) { return x + 10 * y; });
    SnapshotMeta meta{8, 4, 2.0, 1.0, 0.5, 4.0, "u", "run-1"};
    write_snapshot(tmp.path / "u_000001", f, meta, 2.0);
    // Raw layout: element (i, j) at i * ny + j, little-endian doubles.
    const std::string raw = read_file(tmp.path / "u_000001.f64");
    REQUIRE(raw.size() == 8 * 4 * sizeof(double));
    double v;
    std::memcpy(&v, raw.data() + (3 * 4 + 2) * sizeof(double), sizeof v);
    CHECK(v == doctest::Approx(2.0 * (g.x(3) + 10 * g.y(2))));
    const Snapshot s = read_snapshot(tmp.path / "u_000001");
    CHECK(s.meta.run_id == "run-1");
    CHECK(s.meta.t == 0.5);
    CHECK((s.values - 2.0 * f.values).abs().maxCoeff() == 0.0);
  }

  TEST_CASE("checkpoint is bit exact and rejects corruption") {
    TempDir tmp;
    const Grid2D g(8, 4, 2.0, 1.0);
    const RealField2D f = RealField2D::sample(g, [](double x, double y) { return std::sin(x) * std::cos(3 * y) + 0.1; });
    const EvolutionState a{forward(f), 17}, b{forward(RealField2D(g, f.values * 3.0)), 17};
    write_checkpoint(tmp.path / "ck.bin", {&a, &b});
    const auto states = read_checkpoint(tmp.path / "ck.bin", g);
    REQUIRE(states.size() == 2);
    CHECK(states[0].step == 17);
    CHECK((states[0].spectrum.coeffs == a.spectrum.coeffs).all());
    CHECK((states[1].spectrum.coeffs == b.spectrum.coeffs).all());
    CHECK_THROWS_AS(read_checkpoint(tmp.path / "ck.bin", Grid2D(16, 4, 2.0, 1.0)), IoError);
    std::string bytes = read_file(tmp.path / "ck.bin");
    bytes.resize(bytes.size() / 2);
    write_file_atomic(tmp.path / "ck.bin", bytes);
    CHECK_THROWS_AS(read_checkpoint(tmp.path / "ck.bin", g), IoError);
  }

  TEST_CASE("CSV columns round trip with full precision") {
    TempDir tmp;
    Eigen::ArrayXd t(3), x(3);
    t << 0.0, 0.1, 1.0 / 3.0;
    x << -1e-300, M_PI, 2.5e17;
    write_columns_csv(tmp.path / "a.csv", {"t", "x"}, {t, x});
    const CsvTable table = read_csv(tmp.path / "a.csv");
    CHECK(table.header == std::vector<std::string>{"t", "x"});
    const auto back = table.column("x");
    for (int k = 0; k < 3; ++k) CHECK(back[k] == x(k));
    CHECK(format_number(0.1) == "0.1");
  }

  TEST_CASE("missing and unwritable paths raise IoError") {
    CHECK_THROWS_AS(read_file("/nonexistent/kpline/file"), IoError);
    CHECK_THROWS_AS(read_json("/nonexistent/kpline/file.json"), IoError);
    CHECK_THROWS_AS(ensure_directory("/proc/kpline-cannot-create"), IoError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/kpline.cfg"), ConfigError);
  }
}

#include <cstdlib>
#include <map>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "kpline/cli.hpp"
#include "kpline/io.hpp"
#include "kpline/pipeline.hpp"

using namespace kpline;

namespace {

struct Workspace {
  fs::path root;
  Workspace() {
    static int n = 0;
    root = fs::temp_directory_path() / ("kpline-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(root);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  fs::path config(const std::string& extra = "") const {
    const fs::path p = root / "run.cfg";
    write_file_atomic(p,
                      "grid.nx=256\ngrid.ny=8\ngrid.lx=64\ngrid.ly=32\nsolver.sponge_width=8\n"
                      "solver.t_end=1\nsolver.snapshot_every=25\n"
                      "perturbation.kind=random_dx\nperturbation.amplitude=0.01\n" +
                          extra);
    return p;
  }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args, std::map<std::string, std::string> env = {}) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, [&](const char* name) -> const char* {
    auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  return {code, out.str(), err.str()};
}

std::string snapshot_bytes(const fs::path& dir) {
  std::string all;
  for (long k = 0;; ++k) {
    const fs::path stem = snapshot_stem(dir, "u", k);
    if (!fs::exists(stem.string() + ".f64")) break;
    all += read_file(stem.string() + ".f64");
  }
  return all;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("same seed gives byte-identical snapshots") {
    Workspace ws;
    const fs::path cfg = ws.config();
    REQUIRE(cli({"simulate", "--config", cfg.string(), "--output", (ws.root / "a").string(), "--seed", "7"}).code == 0);
    REQUIRE(cli({"simulate", "--config", cfg.string(), "--output", (ws.root / "b").string(), "--seed", "7"}).code == 0);
    REQUIRE(cli({"simulate", "--config", cfg.string(), "--output", (ws.root / "c").string(), "--seed", "8"}).code == 0);
    const std::string a = snapshot_bytes(ws.root / "a");
    CHECK(a.size() == 5 * 256 * 8 * sizeof(double));
    CHECK(a == snapshot_bytes(ws.root / "b"));
    CHECK(a != snapshot_bytes(ws.root / "c"));
    const json manifest = read_json(ws.root / "a" / "manifest.json");
    CHECK(manifest["status"] == "complete");
    CHECK(manifest["snapshots"].size() == 5);
  }

  TEST_CASE("interrupted pipeline resumes to the uninterrupted report") {
    Workspace ws;
    const RunConfig cfg = load_config_file(ws.config().string());
    const json whole = run_pipeline(cfg, ws.root / "whole");
    PipelineOptions first;
    first.stop_after_snapshots = 2;
    run_pipeline(cfg, ws.root / "split", first);
    CHECK(read_json(ws.root / "split" / "sim" / "manifest.json")["status"] == "interrupted");
    PipelineOptions again;
    again.resume = true;
    const json resumed = run_pipeline(cfg, ws.root / "split", again);
    CHECK(resumed == whole);
    CHECK(snapshot_bytes(ws.root / "split" / "sim") == snapshot_bytes(ws.root / "whole" / "sim"));
  }

  TEST_CASE("zero perturbation leaves the perturbation channels empty") {
    Workspace ws;
    const RunConfig cfg = load_config_file(ws.config("perturbation.amplitude=0\n").string());
    const json report = run_pipeline(cfg, ws.root / "p");
    // The free companion run is identically zero; what remains in u is the
    // discretisation error of the travelling soliton.
    for (long k = 0; k < 5; ++k) CHECK(read_snapshot(snapshot_stem(ws.root / "p" / "sim", "v1", k)).values.abs().maxCoeff() == 0.0);
    CHECK(report["stability"]["sup_dev_l2"].get<double>() < 1e-6);
    CHECK(report["v2_xnorm"]["peak"].get<double>() < 1e-6);
    CHECK(report["stability"]["sup_c_dev_l2"].get<double>() < 1e-6);
  }

  TEST_CASE("invalid configuration exits with code 2 naming the field") {
    Workspace ws;
    const Outcome r = cli({"simulate", "--config", ws.config("grid.nx=100\n").string(), "--output", ws.root.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("grid.nx") != std::string::npos);
    CHECK(cli({"simulate", "--config", (ws.root / "missing.cfg").string()}).code == kExitConfig);
    CHECK(cli({"simulate", "--bogus"}).code == kExitConfig);
    CHECK(cli({}).code == kExitConfig);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("environment overrides reach the run") {
    Workspace ws;
    const Outcome r = cli({"simulate", "--config", ws.config().string(), "--output", (ws.root / "e").string()},
                          {{"KPLINE_SOLVER_T_END", "0.5"}});
    REQUIRE(r.code == 0);
    CHECK(read_json(ws.root / "e" / "manifest.json")["snapshots"].size() == 3);
    CHECK(cli({"simulate", "--config", ws.config().string()}, {{"KPLINE_GRID_NX", "12"}}).code == kExitConfig);
  }

  TEST_CASE("output directories are created; unwritable ones exit 2") {
    Workspace ws;
    CHECK(cli({"simulate", "--config", ws.config().string(), "--output", (ws.root / "x" / "y" / "z").string()}).code == 0);
    CHECK(fs::exists(ws.root / "x" / "y" / "z" / "manifest.json"));
    CHECK(cli({"simulate", "--config", ws.config().string(), "--output", "/proc/kpline-denied"}).code == kExitConfig);
  }

  TEST_CASE("numeric halt exits 3 and keeps the last good state") {
    Workspace ws;
    const Outcome r = cli({"simulate", "--config", ws.config("solver.dt=0.5\nsolver.t_end=50\n").string(), "--output",
                           (ws.root / "h").string()});
    CHECK(r.code == kExitHalted);
    CHECK(fs::exists(ws.root / "h" / "snapshots" / "u_last_good.f64"));
    CHECK(read_json(ws.root / "h" / "manifest.json")["status"] == "halted");
  }

  TEST_CASE("individual subcommands chain through their files") {
    Workspace ws;
    const std::string cfg = ws.config().string();
    const std::string sim = (ws.root / "sim").string(), ex = (ws.root / "ex").string(), red = (ws.root / "red").string();
    REQUIRE(cli({"simulate", "--config", cfg, "--output", sim, "--companion"}).code == 0);
    REQUIRE(cli({"extract", "--input", sim, "--output", ex}).code == 0);
    CHECK(fs::exists(fs::path(ex) / "summary.json"));
    CHECK(read_csv(fs::path(ex) / "mod_000000.csv").header == std::vector<std::string>{"y", "c", "x", "x_y", "b"});
    REQUIRE(cli({"reduced", "--config", cfg, "--from-extract", ex, "--output", red}).code == 0);
    REQUIRE(cli({"compare", "--extract", ex, "--reduced", red, "--output", (ws.root / "cmp.csv").string()}).code == 0);
    CHECK(read_csv(ws.root / "cmp.csv").rows.size() == 5);
    REQUIRE(cli({"diagnose", "--input", sim, "--extract", ex, "--output", (ws.root / "d.csv").string()}).code == 0);
    CHECK(read_csv(ws.root / "d.csv").header.size() == 9);
    REQUIRE(cli({"reduced", "--config", cfg, "--output", (ws.root / "red2").string()}).code == 0);
    CHECK(read_csv(ws.root / "red2" / "crest_000000.csv").header == std::vector<std::string>{"y", "b", "x_y", "c"});
  }

  TEST_CASE("spectrum table") {
    Workspace ws;
    const fs::path out = ws.root / "s.csv";
    REQUIRE(cli({"spectrum", "--output", out.string(), "--eta-min", "0", "--eta-max", "0.5", "--count", "3"}).code == 0);
    const CsvTable t = read_csv(out);
    CHECK(t.header == std::vector<std::string>{"eta", "re_lambda", "im_lambda", "residual"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0][1] == 0.0);
    for (const auto& row : t.rows) CHECK(row[3] < 1e-8);
  }

  TEST_CASE("pipeline over a list of amplitudes") {
    Workspace ws;
    const Outcome r = cli({"pipeline", "--config", ws.config().string(), "--output", (ws.root / "v").string(), "--vary",
                           "0.01,0.02"});
    REQUIRE(r.code == 0);
    const json vary = read_json(ws.root / "v" / "vary.json");
    REQUIRE(vary.size() == 2);
    CHECK(vary[1]["epsilon"] == 0.02);
  }

  TEST_CASE("selftest breach fails only the named criterion") {
    Workspace ws;
    const fs::path verdict = ws.root / "verdict.json";
    const Outcome r = cli({"selftest", "--only", "3,4", "--breach", "4", "--json", verdict.string()});
    CHECK(r.code == kExitAcceptance);
    const json j = read_json(verdict);
    REQUIRE(j["criteria"].size() == 2);
    CHECK(j["criteria"][0]["passed"] == true);
    CHECK(j["criteria"][1]["passed"] == false);
    CHECK(j["criteria"][1]["breached"] == true);
    CHECK(j["passed"] == false);
    CHECK(cli({"selftest", "--only", "4"}).code == 0);
    CHECK(cli({"selftest", "--only", "99"}).code == kExitConfig);
  }

  TEST_CASE("installed binary reports exit codes") {
#ifdef KPLINE_CLI_PATH
    const std::string bin = KPLINE_CLI_PATH;
    CHECK(WEXITSTATUS(std::system((bin + " selftest --only 4 > /dev/null").c_str())) == 0);
    CHECK(WEXITSTATUS(std::system((bin + " selftest --only 4 --breach 4 > /dev/null").c_str())) == 4);
    CHECK(WEXITSTATUS(std::system((bin + " simulate --threads 0 2> /dev/null").c_str())) == 2);
#endif
  }
}

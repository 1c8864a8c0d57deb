#include "kpline/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <sstream>
#include <map>

#include "kpline/diagnostics.hpp"
#include "kpline/fft.hpp"
#include "kpline/initial_data.hpp"
#include "kpline/resonant.hpp"
#include "kpline/soliton.hpp"

#ifndef KPLINE_VERSION
#define KPLINE_VERSION "unknown"
#endif

namespace kpline {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buf;
}

std::string indexed(const std::string& prefix, long index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06ld", prefix.c_str(), index);
  return buf;
}

RealField2D field_from_snapshot(const Grid2D& grid, const fs::path& stem, const Scaling& scaling) {
  const Snapshot s = read_snapshot(stem);
  if (s.meta.nx != grid.nx() || s.meta.ny != grid.ny()) throw IoError("snapshot shape mismatch: " + stem.string());
  return RealField2D(grid, s.values * scaling.field_in(1.0));
}

struct RunContext {
  RunConfig physical;
  RunConfig internal;
  Scaling scaling;
  Grid2D grid;

  explicit RunContext(const RunConfig& p)
      : physical(p), internal(to_internal(p)), scaling(Scaling::for_amplitude(p.physics.c0)),
        grid(make_grid(internal)) {}

  double frame_speed() const { return solver_config(internal).frame_speed; }
  double frame_speed_out() const { return frame_speed() * scaling.x_out(1.0) / scaling.time_out(1.0); }
  double internal_time(long step) const { return step * internal.solver.dt; }
};

RunContext context_from_manifest(const fs::path& sim_dir) {
  const json manifest = read_json(sim_dir / "manifest.json");
  return RunContext(config_from_json(manifest.at("config")));
}

// (y, values...) CSV in output units for one crest sample.
Eigen::ArrayXd output_ys(const RunContext& ctx) { return ctx.grid.ys() * ctx.scaling.y_out(1.0); }

}  // namespace

std::string code_version() { return KPLINE_VERSION; }

std::string run_id_for(const RunConfig& physical) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : physical.to_text()) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return physical.experiment.name + "-" + buf;
}

json config_to_json(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  for (const auto& [k, v] : j.items()) set_config_value(cfg, k, v.get<std::string>());
  return cfg;
}

fs::path snapshot_stem(const fs::path& run_dir, const std::string& field, long index) {
  return run_dir / "snapshots" / indexed(field, index);
}

std::vector<SnapshotEntry> list_snapshots(const json& manifest) {
  std::vector<SnapshotEntry> out;
  for (const auto& e : manifest.at("snapshots"))
    out.push_back({e.at("index").get<long>(), e.at("step").get<long>(), e.at("t").get<double>(),
                   e.at("companion").get<bool>()});
  return out;
}

// ---------------------------------------------------------------------------

SimulateResult simulate(const RunConfig& physical, const fs::path& dir, const SimulateOptions& options) {
  const RunContext ctx(physical);
  fft::set_threads(ctx.internal.threads);
  const SolverConfig scfg = solver_config(ctx.internal);
  ensure_directory(dir / "snapshots");
  const fs::path manifest_path = dir / "manifest.json";
  const fs::path checkpoint_path = dir / "checkpoint.bin";
  const std::string run_id = run_id_for(physical);
  const InitialData init =
      make_initial_data(ctx.grid, ctx.internal.perturbation, ctx.internal.physics.offset_L, ctx.internal.physics.eta0);

  json manifest;
  std::vector<EvolutionState> states;
  const bool resuming = options.resume && fs::exists(manifest_path);
  if (resuming) {
    manifest = read_json(manifest_path);
    if (manifest.at("config") != config_to_json(physical))
      throw ConfigError("", "resume: configuration differs from the run in " + dir.string());
    if (manifest.at("companion").get<bool>() != options.companion)
      throw ConfigError("", "resume: companion setting differs from the run in " + dir.string());
    if (manifest.at("status") == "complete") {
      const auto entries = list_snapshots(manifest);
      return {"complete", entries.empty() ? 0 : entries.back().step, static_cast<long>(entries.size())};
    }
    states = read_checkpoint(checkpoint_path, ctx.grid);
    json kept = json::array();
    for (const auto& e : manifest.at("snapshots"))
      if (e.at("step").get<long>() <= states.front().step) kept.push_back(e);
    manifest["snapshots"] = kept;
  } else {
    manifest = {{"config", config_to_json(physical)},
                {"code_version", code_version()},
                {"run_id", run_id},
                {"created", utc_timestamp()},
                {"companion", options.companion},
                {"scaling_lambda", ctx.scaling.lambda},
                {"frame_speed_internal", scfg.frame_speed},
                {"status", "running"},
                {"snapshots", json::array()}};
    states.push_back({forward(init.u0), 0});
    if (options.companion) states.push_back({forward(init.free0), 0});
  }

  const double reference = init.u0.values.abs().maxCoeff();
  std::vector<KpStepper> steppers;
  for (std::size_t k = 0; k < states.size(); ++k) {
    steppers.emplace_back(ctx.grid, scfg);
    steppers.back().set_reference_amplitude(reference);
  }

  auto save_manifest = [&](const std::string& status) {
    manifest["status"] = status;
    manifest["updated"] = utc_timestamp();
    write_json(manifest_path, manifest);
    DiagnosticsSeries series({"t", "l2", "l3", "min", "max"});
    for (const auto& e : manifest["snapshots"])
      series.append({e["t"].get<double>(), e["l2"].get<double>(), e["l3"].get<double>(), e["min"].get<double>(),
                     e["max"].get<double>()});
    std::ostringstream csv;
    series.write_csv(csv);
    write_file_atomic(dir / "diagnostics.csv", csv.str());
  };

  const char* names[] = {"u", "v1"};
  auto emit = [&]() {
    const long index = static_cast<long>(manifest["snapshots"].size());
    const long step = states.front().step;
    const double t = ctx.internal_time(step);
    RunRecord record{};
    for (std::size_t k = 0; k < states.size(); ++k) {
      const RealField2D field = inverse(states[k].spectrum);
      if (k == 0) record = record_for(field, t);
      SnapshotMeta meta{ctx.grid.nx(),
                        ctx.grid.ny(),
                        physical.grid.lx,
                        physical.grid.ly,
                        ctx.scaling.time_out(t),
                        ctx.frame_speed_out(),
                        names[k],
                        run_id};
      write_snapshot(snapshot_stem(dir, names[k], index), field, meta, ctx.scaling.field_out(1.0));
    }
    manifest["snapshots"].push_back({{"index", index},
                                     {"step", step},
                                     {"t", ctx.scaling.time_out(t)},
                                     {"companion", states.size() > 1},
                                     {"l2", record.l2},
                                     {"l3", record.l3},
                                     {"min", record.min},
                                     {"max", record.max}});
    save_manifest("running");
    std::vector<const EvolutionState*> ptrs;
    for (const auto& s : states) ptrs.push_back(&s);
    write_checkpoint(checkpoint_path, ptrs);
  };

  if (!resuming) emit();
  const long total = steps_for(ctx.internal.solver.t_end, scfg.dt);
  long fresh = 0;
  while (states.front().step < total) {
    for (std::size_t k = 0; k < states.size(); ++k) {
      try {
        steppers[k].step(states[k]);
      } catch (const NumericHalt& halt) {
        const RealField2D last = inverse(halt.state.spectrum);
        SnapshotMeta meta{ctx.grid.nx(), ctx.grid.ny(), physical.grid.lx, physical.grid.ly,
                          ctx.scaling.time_out(ctx.internal_time(halt.state.step)), ctx.frame_speed_out(),
                          std::string(names[k]) + "_last_good", run_id};
        write_snapshot(dir / "snapshots" / (std::string(names[k]) + "_last_good"), last, meta,
                       ctx.scaling.field_out(1.0));
        manifest["halt"] = {{"field", names[k]}, {"step", halt.state.step}, {"message", halt.what()}};
        save_manifest("halted");
        throw RunHalted(std::string("simulate: ") + halt.what());
      }
    }
    const long step = states.front().step;
    if (step % ctx.internal.solver.snapshot_every == 0 || step == total) {
      emit();
      ++fresh;
      if (options.stop_after_snapshots >= 0 && fresh >= options.stop_after_snapshots && step < total) {
        save_manifest("interrupted");
        return {"interrupted", step, static_cast<long>(manifest["snapshots"].size())};
      }
    }
  }
  save_manifest("complete");
  return {"complete", states.front().step, static_cast<long>(manifest["snapshots"].size())};
}

// ---------------------------------------------------------------------------

ExtractSummary extract(const fs::path& sim_dir, const fs::path& out_dir) {
  const json manifest = read_json(sim_dir / "manifest.json");
  const RunContext ctx(config_from_json(manifest.at("config")));
  fft::set_threads(ctx.internal.threads);
  ensure_directory(out_dir);
  const auto entries = list_snapshots(manifest);
  const Decomposer dec(ctx.grid, decomposition_options(ctx.internal));
  const double frame_speed = dec.options().frame_speed;
  const Scaling& sc = ctx.scaling;
  const Eigen::ArrayXd ys = output_ys(ctx);

  std::size_t cursor = 0;
  std::optional<RealField2D> current_u;
  auto source = [&]() -> std::optional<TrackFrame> {
    if (cursor >= entries.size()) return std::nullopt;
    const SnapshotEntry& e = entries[cursor++];
    TrackFrame frame{ctx.internal_time(e.step), field_from_snapshot(ctx.grid, snapshot_stem(sim_dir, "u", e.index), sc),
                     std::nullopt};
    if (e.has_companion) frame.v1 = field_from_snapshot(ctx.grid, snapshot_stem(sim_dir, "v1", e.index), sc);
    current_u = frame.u;
    return frame;
  };

  json frames = json::array();
  auto sink = [&](const SplitState& s) {
    const SnapshotEntry& e = entries[cursor - 1];
    const double t = s.mod.t;
    const Eigen::ArrayXd x_y = dec.band().derivative(s.mod.x);
    const Eigen::ArrayXd b = b_transform(dec.band(), s.mod.c);
    write_columns_csv(out_dir / (indexed("mod", e.index) + ".csv"), {"y", "c", "x", "x_y", "b"},
                      {ys, s.mod.c * sc.field_out(1.0), s.mod.x * sc.x_out(1.0),
                       x_y * (sc.x_out(1.0) / sc.y_out(1.0)), b});
    SnapshotMeta meta{ctx.grid.nx(), ctx.grid.ny(), ctx.physical.grid.lx,    ctx.physical.grid.ly,
                      sc.time_out(t), ctx.frame_speed_out(), "v2", run_id_for(ctx.physical)};
    write_snapshot(out_dir / indexed("v2", e.index), s.v2, meta, sc.field_out(1.0));

    const CrestProfiles crest{s.mod.c, s.mod.x - frame_speed * t};
    const RealField2D ansatz = assemble_ansatz(ctx.grid, crest, ctx.internal.physics.offset_L + 3.0 * t);
    const double dy = ctx.grid.dy();
    frames.push_back({{"index", e.index},
                      {"step", e.step},
                      {"t", sc.time_out(t)},
                      {"residual", s.residual},
                      {"iterations", s.iterations},
                      {"utilde_xnorm", s.utilde_xnorm},
                      {"v2_xnorm", norm_X(s.v2, dec.options().alpha, 0.0, dec.options().x_front)},
                      {"dev_l2", l2_norm(RealField2D(ctx.grid, current_u->values - ansatz.values))},
                      {"c_dev_l2", std::sqrt((s.mod.c - 2.0).square().sum() * dy)},
                      {"xy_l2", std::sqrt(x_y.square().sum() * dy)}});
  };

  const TrackResult tr = track(dec, source, sink);
  ExtractSummary summary{static_cast<long>(frames.size()), tr.aborted, tr.reason};
  write_json(out_dir / "summary.json", {{"config", config_to_json(ctx.physical)},
                                        {"frames", frames},
                                        {"aborted", tr.aborted},
                                        {"reason", tr.reason}});
  return summary;
}

// ---------------------------------------------------------------------------

void run_reduced(const RunConfig& physical, const ModulationState& start, const std::vector<double>& times,
                 const fs::path& out_dir) {
  const RunContext ctx(physical);
  ensure_directory(out_dir);
  const YBand band(ctx.grid, ctx.internal.physics.eta0);
  const Scaling& sc = ctx.scaling;
  const Eigen::ArrayXd ys = output_ys(ctx);
  if (times.empty()) throw InvalidArgument("reduced: no output times");

  std::optional<ReducedModel> model;
  CrestState state;
  DiagnosticsSeries index({"index", "t"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double target = times[k];
    if (k == 0) {
      model.emplace(band, ctx.internal.reduced.dt, ctx.internal.reduced.nonlinear);
      state = model->from_modulation(start.c, start.x, target);
    } else {
      const double gap = target - state.t;
      if (!(gap > 0)) throw InvalidArgument("reduced: output times must increase");
      const long steps = std::max(1L, std::lround(gap / ctx.internal.reduced.dt));
      const double h = gap / steps;
      if (std::abs(h - model->dt()) > 1e-12 * h) model.emplace(band, h, ctx.internal.reduced.nonlinear);
      model->evolve(state, target);
      state.t = target;
    }
    const auto phys = model->to_physical(state);
    write_columns_csv(out_dir / (indexed("crest", static_cast<long>(k)) + ".csv"), {"y", "b", "x_y", "c"},
                      {ys, phys.b, phys.x_y * (sc.x_out(1.0) / sc.y_out(1.0)), phys.c * sc.field_out(1.0)});
    index.append({static_cast<double>(k), sc.time_out(target)});
  }
  std::ostringstream csv;
  index.write_csv(csv);
  write_file_atomic(out_dir / "index.csv", csv.str());
  write_json(out_dir / "summary.json", {{"config", config_to_json(physical)}, {"frames", times.size()}});
}

void run_reduced_from_extract(const fs::path& extract_dir, const fs::path& out_dir) {
  const json summary = read_json(extract_dir / "summary.json");
  const RunContext ctx(config_from_json(summary.at("config")));
  const auto& frames = summary.at("frames");
  if (frames.empty()) throw InvalidArgument("reduced: extraction has no frames");
  const long first = frames.front().at("index").get<long>();
  const CsvTable mod = read_csv(extract_dir / (indexed("mod", first) + ".csv"));
  const auto c = mod.column("c");
  const auto x = mod.column("x");
  ModulationState start{Eigen::Map<const Eigen::ArrayXd>(c.data(), c.size()) * ctx.scaling.field_in(1.0),
                        Eigen::Map<const Eigen::ArrayXd>(x.data(), x.size()) / ctx.scaling.x_out(1.0), 0.0};
  std::vector<double> times;
  for (const auto& f : frames) times.push_back(ctx.internal_time(f.at("step").get<long>()));
  start.t = times.front();
  run_reduced(ctx.physical, start, times, out_dir);
}

void run_reduced_from_config(const RunConfig& physical, const fs::path& out_dir) {
  const RunContext ctx(physical);
  const InitialData init =
      make_initial_data(ctx.grid, ctx.internal.perturbation, ctx.internal.physics.offset_L, ctx.internal.physics.eta0);
  const SolverConfig scfg = solver_config(ctx.internal);
  const long total = steps_for(ctx.internal.solver.t_end, scfg.dt);
  std::vector<double> times;
  for (long step = 0; step <= total; step += ctx.internal.solver.snapshot_every) times.push_back(ctx.internal_time(step));
  if (total % ctx.internal.solver.snapshot_every) times.push_back(ctx.internal_time(total));
  const ModulationState start{init.crest0.amplitude, init.crest0.position, 0.0};
  run_reduced(physical, start, times, out_dir);
}

// ---------------------------------------------------------------------------

std::vector<CompareRow> compare_dirs(const fs::path& extract_dir, const fs::path& reduced_dir, const fs::path& out_csv) {
  const json summary = read_json(extract_dir / "summary.json");
  std::vector<CrestSample> full, reduced;
  for (const auto& f : summary.at("frames")) {
    const CsvTable t = read_csv(extract_dir / (indexed("mod", f.at("index").get<long>()) + ".csv"));
    const auto c = t.column("c"), xy = t.column("x_y");
    full.push_back({f.at("t").get<double>(), Eigen::Map<const Eigen::ArrayXd>(c.data(), c.size()),
                    Eigen::Map<const Eigen::ArrayXd>(xy.data(), xy.size())});
  }
  const CsvTable index = read_csv(reduced_dir / "index.csv");
  const auto ids = index.column("index"), times = index.column("t");
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const CsvTable t = read_csv(reduced_dir / (indexed("crest", std::lround(ids[k])) + ".csv"));
    const auto c = t.column("c"), xy = t.column("x_y");
    reduced.push_back({times[k], Eigen::Map<const Eigen::ArrayXd>(c.data(), c.size()),
                       Eigen::Map<const Eigen::ArrayXd>(xy.data(), xy.size())});
  }
  if (full.empty()) throw InvalidArgument("compare: extraction has no frames");
  const CsvTable first = read_csv(extract_dir / (indexed("mod", summary["frames"][0]["index"].get<long>()) + ".csv"));
  const auto ys = first.column("y");
  const double dy = ys.size() > 1 ? ys[1] - ys[0] : 1.0;
  const auto rows = compare(full, reduced, dy);
  std::ostringstream csv;
  compare_series(rows).write_csv(csv);
  write_file_atomic(out_csv, csv.str());
  return rows;
}

DiagnosticsSeries diagnose(const fs::path& sim_dir, const fs::path& extract_dir, const fs::path& out_csv) {
  const RunContext ctx = context_from_manifest(sim_dir);
  const json summary = read_json(extract_dir / "summary.json");
  const json manifest = read_json(sim_dir / "manifest.json");
  const auto entries = list_snapshots(manifest);
  std::map<long, SnapshotEntry> by_index;
  for (const auto& e : entries) by_index[e.index] = e;

  const double alpha = ctx.internal.physics.alpha;
  const double offset_L = ctx.internal.physics.offset_L;
  const double frame_speed = ctx.frame_speed();
  const auto& vir = ctx.internal.virial;
  const double nu = 0.5 * std::min(3.0, vir.c1);
  const double no_mean_check = std::numeric_limits<double>::infinity();

  DiagnosticsSeries series({"t", "l2", "l3", "xnorm", "wnorm", "virial", "virial_dissip", "Q", "Qcompanion"});
  double dissip_acc = 0.0, last_rate = 0.0, last_t = 0.0;
  bool first = true;
  for (const auto& f : summary.at("frames")) {
    const long idx = f.at("index").get<long>();
    const SnapshotEntry& e = by_index.at(idx);
    const double t = ctx.internal_time(e.step);
    const CsvTable mod = read_csv(extract_dir / (indexed("mod", idx) + ".csv"));
    const auto cv = mod.column("c"), xv = mod.column("x");
    const Eigen::ArrayXd c = Eigen::Map<const Eigen::ArrayXd>(cv.data(), cv.size()) * ctx.scaling.field_in(1.0);
    const Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(xv.data(), xv.size()) / ctx.scaling.x_out(1.0);
    const RealField2D v2 = field_from_snapshot(ctx.grid, extract_dir / indexed("v2", idx), ctx.scaling);
    RealField2D v1(ctx.grid);
    if (e.has_companion) v1 = field_from_snapshot(ctx.grid, snapshot_stem(sim_dir, "v1", idx), ctx.scaling);

    const RealField2D v1_crest = shift_lines(v1, -(x - frame_speed * t));
    const RealField2D v(ctx.grid, v1_crest.values + v2.values);
    const double centre = vir.c1 * t + vir.x0 - frame_speed * t;
    const double rate = nu * virial_dissipation(v1, vir.eps, centre, no_mean_check);
    if (!first) dissip_acc += 0.5 * (rate + last_rate) * (t - last_t);
    const QValues q = q_functional(v, c, t, offset_L);
    series.append({ctx.scaling.time_out(t), l2_norm(v), lp_norm(v, 3.0),
                   norm_X(v2, alpha, 0.0, ctx.internal.decomposition.x_front), norm_W(v2, alpha, t, offset_L, 0.0),
                   virial_I(v1, vir.eps, centre), dissip_acc, q.q, q.companion});
    last_rate = rate;
    last_t = t;
    first = false;
  }
  std::ostringstream csv;
  series.write_csv(csv);
  write_file_atomic(out_csv, csv.str());
  return series;
}

// ---------------------------------------------------------------------------

namespace {

const char* kStages[] = {"simulate", "extract", "reduced", "compare", "diagnose"};

json fresh_stages() {
  json j = json::object();
  for (const char* s : kStages) j[s] = {{"status", "pending"}, {"message", ""}};
  return j;
}

json read_stage_file(const fs::path& root) {
  const fs::path p = root / "stages.json";
  return fs::exists(p) ? read_json(p) : fresh_stages();
}

double max_of(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

json build_report(const fs::path& root) {
  const json stages = read_stage_file(root);
  json report = {{"stages", stages}};
  const fs::path sim = root / "sim";
  if (fs::exists(sim / "manifest.json")) {
    const json manifest = read_json(sim / "manifest.json");
    const RunConfig cfg = config_from_json(manifest.at("config"));
    report["config"] = manifest.at("config");
    report["run_id"] = manifest.at("run_id");
    report["epsilon"] = cfg.perturbation.amplitude;
    report["perturbation"] = to_string(cfg.perturbation.kind);
    report["snapshots"] = manifest.at("snapshots").size();
  }
  const fs::path ex = root / "extract" / "summary.json";
  if (fs::exists(ex)) {
    const json summary = read_json(ex);
    const auto& frames = summary.at("frames");
    double sup_dev = 0, sup_c = 0, sup_xy = 0, peak = 0, peak_t = 0, max_res = 0;
    for (const auto& f : frames) {
      sup_dev = std::max(sup_dev, f.at("dev_l2").get<double>());
      sup_c = std::max(sup_c, f.at("c_dev_l2").get<double>());
      sup_xy = std::max(sup_xy, f.at("xy_l2").get<double>());
      max_res = std::max(max_res, f.at("residual").get<double>());
      if (f.at("v2_xnorm").get<double>() > peak) {
        peak = f.at("v2_xnorm").get<double>();
        peak_t = f.at("t").get<double>();
      }
    }
    const double eps = report.value("epsilon", 0.0);
    json stability = {{"sup_dev_l2", sup_dev}, {"sup_c_dev_l2", sup_c}, {"sup_xy_l2", sup_xy},
                      {"max_residual", max_res}, {"frames", frames.size()}};
    stability["sup_dev_over_eps"] = eps > 0 ? json(sup_dev / eps) : json(nullptr);
    report["stability"] = stability;
    report["extract"] = {{"aborted", summary.at("aborted")}, {"reason", summary.at("reason")}};
    if (!frames.empty())
      report["v2_xnorm"] = {{"peak", peak},
                            {"peak_t", peak_t},
                            {"final", frames.back().at("v2_xnorm")},
                            {"final_t", frames.back().at("t")}};
  }
  const fs::path cmp = root / "compare.csv";
  if (fs::exists(cmp)) {
    const CsvTable t = read_csv(cmp);
    report["compare"] = {{"max_err_c_l2", max_of(t.column("err_c_l2"))},
                         {"max_err_xy_l2", max_of(t.column("err_xy_l2"))},
                         {"max_err_c_sup", max_of(t.column("err_c_sup"))},
                         {"max_err_xy_sup", max_of(t.column("err_xy_sup"))}};
  }
  const fs::path diag = root / "diagnostics.csv";
  if (fs::exists(diag)) {
    const CsvTable t = read_csv(diag);
    const auto q = t.column("Qcompanion");
    if (!q.empty()) report["q_companion_drift"] = q.back() - q.front();
  }
  return report;
}

json run_pipeline(const RunConfig& physical, const fs::path& root, const PipelineOptions& options) {
  validate(physical);
  ensure_directory(root);
  json stages = options.resume ? read_stage_file(root) : fresh_stages();
  auto save = [&]() { write_json(root / "stages.json", stages); };
  auto done = [&](const char* s) { return stages[s]["status"] == "complete"; };
  save();

  std::exception_ptr pending;
  auto run_stage = [&](const char* name, const std::function<std::string()>& body) -> bool {
    if (options.resume && done(name)) return true;
    try {
      const std::string status = body();
      stages[name] = {{"status", status}, {"message", ""}};
      save();
      return status == "complete";
    } catch (const std::exception& e) {
      stages[name] = {{"status", "failed"}, {"message", e.what()}};
      save();
      if (dynamic_cast<const RunHalted*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
          dynamic_cast<const IoError*>(&e))
        pending = std::current_exception();
      return false;
    }
  };

  bool ok = run_stage("simulate", [&] {
    SimulateOptions so{options.resume, true, options.stop_after_snapshots};
    return simulate(physical, root / "sim", so).status;
  });
  if (ok) {
    ok = run_stage("extract", [&] {
      const ExtractSummary s = extract(root / "sim", root / "extract");
      if (s.frames == 0) throw InvalidArgument("extract: no frame decomposed (" + s.reason + ")");
      return std::string(s.aborted ? "aborted" : "complete");
    });
    // An aborted extraction still yields a usable prefix of frames.
    const bool have_frames = ok || stages["extract"]["status"] == "aborted";
    if (have_frames) {
      const bool reduced_ok = run_stage("reduced", [&] {
        run_reduced_from_extract(root / "extract", root / "reduced");
        return std::string("complete");
      });
      if (reduced_ok)
        run_stage("compare", [&] {
          compare_dirs(root / "extract", root / "reduced", root / "compare.csv");
          return std::string("complete");
        });
      run_stage("diagnose", [&] {
        diagnose(root / "sim", root / "extract", root / "diagnostics.csv");
        return std::string("complete");
      });
    }
  }
  const json report = build_report(root);
  write_json(root / "report.json", report);
  if (pending) std::rethrow_exception(pending);
  return report;
}

json run_vary(const RunConfig& physical, const fs::path& root, const std::vector<double>& amplitudes,
              const PipelineOptions& options) {
  ensure_directory(root);
  json summary = json::array();
  for (double eps : amplitudes) {
    RunConfig cfg = physical;
    cfg.perturbation.amplitude = eps;
    const std::string name = "eps_" + format_number(eps);
    const json report = run_pipeline(cfg, root / name, options);
    json item = {{"epsilon", eps}, {"directory", name}};
    if (report.contains("stability")) item["stability"] = report["stability"];
    if (report.contains("compare")) item["compare"] = report["compare"];
    if (report.contains("v2_xnorm")) item["v2_xnorm"] = report["v2_xnorm"];
    summary.push_back(item);
  }
  write_json(root / "vary.json", summary);
  return summary;
}

// ---------------------------------------------------------------------------

void write_spectrum_csv(const fs::path& path, double eta_min, double eta_max, int count, double alpha) {
  if (count < 1 || !(eta_max >= eta_min)) throw InvalidArgument("spectrum: need count >= 1 and eta_max >= eta_min");
  Eigen::ArrayXd etas(count), re(count), im(count), res(count);
  const Line1D line(2048, -40.0, 40.0);
  for (int k = 0; k < count; ++k) {
    const double eta = count == 1 ? eta_min : eta_min + (eta_max - eta_min) * k / (count - 1);
    const cplx lam = resonant_lambda(eta);
    etas(k) = eta;
    re(k) = lam.real();
    im(k) = lam.imag();
    if (eta != 0.0) {
      res(k) = eigen_residual(eta, alpha, line).forward;
    } else {
      // Translation mode phi' at eta = 0, in the same weighted norm.
      Eigen::ArrayXcd w(line.n);
      for (int i = 0; i < line.n; ++i) w(i) = std::exp(alpha * line.x(i)) * soliton_dx(line.x(i), 2.0);
      const Eigen::ArrayXcd r = apply_linearized(line, w, 0.0, 2.0, alpha);
      res(k) = std::sqrt(r.abs2().sum() / w.abs2().sum());
    }
  }
  write_columns_csv(path, {"eta", "re_lambda", "im_lambda", "residual"}, {etas, re, im, res});
}

}  // namespace kpline

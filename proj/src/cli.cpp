#include "kpline/cli.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "kpline/acceptance.hpp"
#include "kpline/pipeline.hpp"

namespace kpline {

namespace {

struct CommonFlags {
  std::string config_path;
  std::string output;
  bool resume = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_resume) {
  cmd->add_option("--config", flags.config_path, "key=value configuration file");
  cmd->add_option("--output", flags.output, "output location (defaults to experiment.output_dir)");
  if (with_resume) cmd->add_flag("--resume", flags.resume, "continue an interrupted run in place");
  cmd->add_option("--seed", flags.seed, "overrides perturbation.seed");
  cmd->add_option("--threads", flags.threads, "overrides run.threads");
}

// Defaults, then the file, then the environment, then command-line flags.
RunConfig resolve_config(const CommonFlags& flags, const EnvLookup& env) {
  RunConfig cfg = flags.config_path.empty() ? RunConfig{} : load_config_file(flags.config_path);
  apply_env_overrides(cfg, env);
  if (flags.seed) cfg.perturbation.seed = *flags.seed;
  if (flags.threads) cfg.threads = *flags.threads;
  validate(cfg);
  return cfg;
}

fs::path output_for(const CommonFlags& flags, const RunConfig& cfg) {
  return flags.output.empty() ? fs::path(cfg.experiment.output_dir) : fs::path(flags.output);
}

std::set<int> parse_id_list(const std::vector<std::string>& items) {
  std::set<int> ids;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      if (part[0] == 'C' || part[0] == 'c') part.erase(0, 1);
      std::size_t used = 0;
      int id = 0;
      try {
        id = std::stoi(part, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != part.size() || id < 1 || id > acceptance_criterion_count())
        throw ConfigError("--only", "unknown criterion '" + part + "'");
      ids.insert(id);
    }
  }
  return ids;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Line-soliton simulator for the KP-II equation"};
  app.name("kpline");
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());

  CommonFlags flags;

  auto* simulate_cmd = app.add_subcommand("simulate", "evolve the configured initial data and write snapshots");
  add_common(simulate_cmd, flags, true);
  bool with_companion = false;
  simulate_cmd->add_flag("--companion", with_companion, "also evolve the free run of the initial perturbation");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "resonant eigenvalue table with eigen-residuals");
  add_common(spectrum_cmd, flags, false);
  double eta_min = 0.0, eta_max = 1.0;
  int eta_count = 21;
  std::optional<double> alpha_flag;
  spectrum_cmd->add_option("--eta-min", eta_min);
  spectrum_cmd->add_option("--eta-max", eta_max);
  spectrum_cmd->add_option("--count", eta_count)->check(CLI::PositiveNumber);
  spectrum_cmd->add_option("--alpha", alpha_flag, "weight exponent (defaults to physics.alpha)");

  std::string input_dir, extract_dir, reduced_dir;

  auto* extract_cmd = app.add_subcommand("extract", "decompose every snapshot of a simulation directory");
  add_common(extract_cmd, flags, false);
  extract_cmd->add_option("--input", input_dir, "simulation directory")->required();

  auto* reduced_cmd = app.add_subcommand("reduced", "run the reduced crest model");
  add_common(reduced_cmd, flags, false);
  reduced_cmd->add_option("--from-extract", extract_dir, "seed from the first extracted frame instead of the config");

  auto* compare_cmd = app.add_subcommand("compare", "compare extracted and reduced crest series");
  add_common(compare_cmd, flags, false);
  compare_cmd->add_option("--extract", extract_dir)->required();
  compare_cmd->add_option("--reduced", reduced_dir)->required();

  auto* diagnose_cmd = app.add_subcommand("diagnose", "norm, virial and Q series of a run");
  add_common(diagnose_cmd, flags, false);
  diagnose_cmd->add_option("--input", input_dir, "simulation directory (with the companion run)")->required();
  diagnose_cmd->add_option("--extract", extract_dir, "extraction directory")->required();

  auto* pipeline_cmd = app.add_subcommand("pipeline", "simulate, extract, reduce, compare and diagnose");
  add_common(pipeline_cmd, flags, true);
  std::vector<double> vary;
  pipeline_cmd->add_option("--vary", vary, "repeat for each listed perturbation amplitude")->delimiter(',');

  auto* selftest_cmd = app.add_subcommand("selftest", "run the acceptance criteria");
  std::string json_path, work_dir;
  bool json_stdout = false, keep_work = false;
  int breach = 0;
  std::vector<std::string> only;
  selftest_cmd->add_option("--json", json_path, "write the verdict as JSON to this file ('-' for stdout)");
  selftest_cmd->add_option("--breach", breach, "debug: force criterion N to fail");
  selftest_cmd->add_option("--only", only, "comma-separated criterion numbers")->delimiter(',');
  selftest_cmd->add_option("--work-dir", work_dir, "scratch directory for pipeline runs");
  selftest_cmd->add_flag("--keep", keep_work, "keep the scratch directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (selftest_cmd->parsed()) {
      AcceptanceOptions opts;
      opts.only = parse_id_list(only);
      if (breach < 0 || breach > acceptance_criterion_count())
        throw ConfigError("--breach", "unknown criterion " + std::to_string(breach));
      opts.breach = breach;
      opts.work_dir = work_dir;
      opts.keep_work_dir = keep_work;
      json_stdout = json_path == "-";
      opts.on_result = [&](const CriterionResult& r) {
        (json_stdout ? err : out) << format_result_line(r) << std::endl;
      };
      const auto results = run_acceptance(opts);
      const json verdict = acceptance_json(results);
      if (json_stdout)
        out << verdict.dump(2) << "\n";
      else if (!json_path.empty())
        write_json(json_path, verdict);
      const long failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
      (json_stdout ? err : out) << (failed ? "FAILED: " : "PASSED: ") << results.size() - failed << " of "
                                << results.size() << " criteria passed" << std::endl;
      return failed ? kExitAcceptance : kExitOk;
    }

    const RunConfig cfg = resolve_config(flags, env);

    if (simulate_cmd->parsed()) {
      const fs::path dir = output_for(flags, cfg);
      const SimulateResult r = simulate(cfg, dir, {flags.resume, with_companion, -1});
      out << "simulate: " << r.status << ", " << r.snapshots << " snapshots in " << dir.string() << "\n";
    } else if (spectrum_cmd->parsed()) {
      const fs::path path = flags.output.empty() ? fs::path("spectrum.csv") : fs::path(flags.output);
      if (path.has_parent_path()) ensure_directory(path.parent_path());
      write_spectrum_csv(path, eta_min, eta_max, eta_count, alpha_flag.value_or(cfg.physics.alpha));
      out << "spectrum: " << path.string() << "\n";
    } else if (extract_cmd->parsed()) {
      const fs::path dir = flags.output.empty() ? fs::path(input_dir) / "extract" : fs::path(flags.output);
      const ExtractSummary s = extract(input_dir, dir);
      out << "extract: " << s.frames << " frames" << (s.aborted ? " (aborted: " + s.reason + ")" : "") << "\n";
      if (s.frames == 0) return kExitHalted;
    } else if (reduced_cmd->parsed()) {
      const fs::path dir = output_for(flags, cfg) / "reduced";
      const fs::path target = flags.output.empty() ? dir : fs::path(flags.output);
      if (extract_dir.empty())
        run_reduced_from_config(cfg, target);
      else
        run_reduced_from_extract(extract_dir, target);
      out << "reduced: " << target.string() << "\n";
    } else if (compare_cmd->parsed()) {
      const fs::path path = flags.output.empty() ? fs::path("compare.csv") : fs::path(flags.output);
      const auto rows = compare_dirs(extract_dir, reduced_dir, path);
      out << "compare: " << rows.size() << " rows in " << path.string() << "\n";
    } else if (diagnose_cmd->parsed()) {
      const fs::path path = flags.output.empty() ? fs::path(input_dir) / "diagnostics_full.csv" : fs::path(flags.output);
      const auto series = diagnose(input_dir, extract_dir, path);
      out << "diagnose: " << series.size() << " rows in " << path.string() << "\n";
    } else if (pipeline_cmd->parsed()) {
      const fs::path root = output_for(flags, cfg);
      PipelineOptions popts;
      popts.resume = flags.resume;
      if (!vary.empty()) {
        run_vary(cfg, root, vary, popts);
        out << "pipeline: " << vary.size() << " runs under " << root.string() << "\n";
        for (double eps : vary) {
          const json stages = read_json(root / ("eps_" + format_number(eps)) / "stages.json");
          for (const auto& [name, stage] : stages.items())
            if (stage["status"] == "failed") return kExitHalted;
        }
        return kExitOk;
      }
      const json report = run_pipeline(cfg, root, popts);
      out << "pipeline: report in " << (root / "report.json").string() << "\n";
      for (const auto& [name, stage] : report["stages"].items()) {
        if (stage["status"] == "failed") {
          err << "stage " << name << " failed: " << stage["message"].get<std::string>() << "\n";
          return kExitHalted;
        }
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RunHalted& e) {
    err << "halted: " << e.what() << "\n";
    return kExitHalted;
  } catch (const NumericHalt& e) {
    err << "halted: " << e.what() << "\n";
    return kExitHalted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitHalted;
  }
}

}  // namespace kpline

#include "lsbd/runner.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>
#include <iomanip>
#include <json.hpp>
#include <mutex>
#include <sstream>

namespace lsbd {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::json;

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<std::string> failed_families(const VerificationReport& report) {
  std::set<std::string> out;
  for (const BoundCheck& c : report.checks) {
    if (!c.passed) out.insert(check_family(c.name));
  }
  return {out.begin(), out.end()};
}

json summary_json(const VerificationReport& report) {
  const std::size_t passed = report.passed_count();
  return {{"checks", report.checks.size()},
          {"passed", passed},
          {"failed", report.checks.size() - passed},
          {"all_passed", report.all_passed()},
          {"failed_families", failed_families(report)}};
}

}  // namespace

std::string tool_version() {
#ifdef LSBD_VERSION
  return LSBD_VERSION;
#else
  return "unknown";
#endif
}

Experiment execute(const RunConfig& config, double t,
                   const std::function<void(const StepRecord&)>& on_step) {
  const std::set<std::string> suites = config.effective_suites();
  Experiment ex;
  ex.data = build_initial_data(config.model, config.lattice.d);

  RunOptions options;
  options.series = config.series;
  options.theorem_t_max = config.theorem_t_max;
  options.keep_history = suites.count("trees") > 0 || config.debug_dump;
  options.dense_threshold = config.dense_threshold;
  options.on_step = on_step;
  ex.run = run(config.lattice, ex.data, t, options);

  Evidence& ev = ex.evidence;
  ev.lattice = config.lattice;
  ev.t = t;
  ev.theorem_t_max = config.theorem_t_max;
  ev.x_d = config.effective_x_d();
  ev.seed = config.seed;
  ev.completed = ex.run.completed;
  ev.error = ex.run.error;
  ev.initial_norms = ex.run.initial_norms;
  ev.records = ex.run.records;

  if (ex.run.completed) {
    const GlobalOperator original =
        assemble_hamiltonian(config.lattice, ex.data, t, config.dense_threshold);
    const GlobalOperator final_k =
        reconstruct(ex.run.final_table, config.lattice, config.dense_threshold);
    ev.oracle = make_oracle(original, final_k);
    if (suites.count("trees")) {
      const RunCache cache(ex.run, config.series);
      ev.trees = audit_trees(cache, ev.x_d, config.trees_max_rectangles, config.trees_c);
    }
  } else {
    spdlog::error("run stopped: {}", ex.run.error);
  }

  ex.report = evaluate(ev, ex.data, config.model.coupling_normalization, suites);
  ex.exit_code = ex.run.completed && ex.report.all_passed() ? kExitOk : kExitFailure;
  return ex;
}

int run_experiment(const RunConfig& config) {
  const fs::path dir = config.output_directory;
  fs::create_directories(dir);
  const std::string started = utc_now();
  spdlog::info("run d={} N={} n_s={} t={} -> {}", config.lattice.d, config.lattice.N,
               config.model.n_s, config.t, dir.string());
  write_atomic(dir / "config.json", serialize_config(config));

  std::string steps_text;
  json index = json::array();
  json wall = json::array();
  auto on_step = [&](const StepRecord& r) {
    steps_text += step_record_line(r) + "\n";
    write_atomic(dir / "steps.jsonl", steps_text);
    index.push_back({{"index", r.index}, {"step", r.step.to_string()}, {"line", r.index}});
    wall.push_back(r.wall_seconds);
    spdlog::info("step {:>3} {} gap={:.12f} terms={}", r.index, r.step.to_string(), r.gap,
                 r.terms_used);
  };

  json manifest = {{"schema_version", kSchemaVersion},
                   {"tool_version", tool_version()},
                   {"config_hash", config_hash(config)},
                   {"started_at", started}};
  int exit_code = kExitFailure;
  try {
    Experiment ex = execute(config, config.t, on_step);
    if (steps_text.empty()) write_atomic(dir / "steps.jsonl", "");
    write_atomic(dir / "initial.json", initial_json(ex.evidence, ex.data.normalization));
    write_atomic(dir / "outcome.json", outcome_json(ex.evidence.completed, ex.evidence.error));
    if (ex.evidence.oracle) write_atomic(dir / "oracle.json", oracle_json(*ex.evidence.oracle));
    if (ex.evidence.trees) write_atomic(dir / "branch_audit.json", tree_audit_json(*ex.evidence.trees));
    write_atomic(dir / "verification.json", verification_json(ex.report));
    write_atomic(dir / "gap_vs_step.csv", gap_vs_step_csv(ex.evidence.records));
    write_atomic(dir / "norm_vs_circumference.csv",
                 norm_vs_circumference_csv(ex.evidence.initial_norms, ex.evidence.records));
    write_atomic(dir / "summary.csv", summary_csv(ex.evidence.records, ex.report));
    if (config.keep_tables) write_table_dump(dir / "tables" / "final.bin", ex.run.final_table);
    if (config.debug_dump) {
      for (std::size_t i = 0; i < ex.run.history.size(); ++i) {
        std::ostringstream name;
        name << "step_" << std::setw(3) << std::setfill('0') << i << ".bin";
        write_table_dump(dir / "tables" / name.str(), ex.run.history[i]);
      }
    }
    manifest["verification"] = summary_json(ex.report);
    manifest["completed"] = ex.evidence.completed;
    manifest["error"] = ex.evidence.error;
    if (!ex.evidence.completed && ex.run.error_kind) {
      manifest["error_kind"] = to_string(*ex.run.error_kind);
    }
    exit_code = ex.exit_code;
    const std::size_t passed = ex.report.passed_count();
    spdlog::info("{} / {} checks passed", passed, ex.report.checks.size());
    for (const BoundCheck& c : ex.report.checks) {
      if (!c.passed) spdlog::warn("failed {}: lhs={:.6e} rhs={:.6e}", c.name, c.lhs, c.rhs);
    }
  } catch (const std::exception& e) {
    spdlog::error("run aborted: {}", e.what());
    manifest["completed"] = false;
    manifest["error"] = e.what();
  }
  manifest["step_records"] = index;
  manifest["step_wall_seconds"] = wall;
  manifest["finished_at"] = utc_now();
  manifest["exit_code"] = exit_code;
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return exit_code;
}

int run_scan(const RunConfig& config) {
  const fs::path dir = config.output_directory;
  fs::create_directories(dir);
  const std::string started = utc_now();
  std::vector<double> grid = config.t_grid.empty() ? std::vector<double>{config.t} : config.t_grid;
  write_atomic(dir / "config.json", serialize_config(config));
  std::mutex log_mutex;

  const ScanReport scan = t_scan(
      grid,
      [&](double t) {
        ScanPoint p;
        p.t = t;
        try {
          const Experiment ex = execute(config, t);
          p.completed = ex.evidence.completed;
          p.passed = ex.exit_code == kExitOk;
          p.checks = ex.report.checks.size();
          p.failures = p.checks - ex.report.passed_count();
          p.failed_families = failed_families(ex.report);
          if (!p.completed) p.failed_families.push_back("run.completed");
        } catch (const std::exception& e) {
          p.failed_families = {"run.exception"};
          std::lock_guard<std::mutex> lock(log_mutex);
          spdlog::error("t={} aborted: {}", t, e.what());
        }
        std::lock_guard<std::mutex> lock(log_mutex);
        spdlog::info("t={} {} ({} failures)", t, p.passed ? "pass" : "fail", p.failures);
        return p;
      },
      config.scan_workers);

  write_atomic(dir / "scan.json", scan_json(scan));
  write_atomic(dir / "t_scan_frontier.csv", t_scan_frontier_csv(scan));
  bool all = true;
  for (const ScanPoint& p : scan.points) all = all && p.passed;
  if (!scan.monotone) spdlog::warn("pass/fail pattern over t is not monotone");
  if (scan.largest_passing) spdlog::info("largest passing t: {}", *scan.largest_passing);

  json manifest = {{"schema_version", kSchemaVersion},
                   {"tool_version", tool_version()},
                   {"config_hash", config_hash(config)},
                   {"started_at", started},
                   {"finished_at", utc_now()},
                   {"points", scan.points.size()},
                   {"monotone", scan.monotone},
                   {"exit_code", all ? kExitOk : kExitFailure}};
  write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  return all ? kExitOk : kExitFailure;
}

VerifyResult verify_artifacts(const fs::path& directory) {
  const RunConfig config = load_config((directory / "config.json").string());
  Evidence ev;
  parse_initial_json(read_file(directory / "initial.json"), ev);
  parse_outcome_json(read_file(directory / "outcome.json"), ev);
  ev.records = parse_step_records(read_file(directory / "steps.jsonl"));
  if (fs::exists(directory / "oracle.json")) {
    ev.oracle = parse_oracle_json(read_file(directory / "oracle.json"));
  }
  if (fs::exists(directory / "branch_audit.json")) {
    ev.trees = parse_tree_audit_json(read_file(directory / "branch_audit.json"));
  }
  const InitialData data = build_initial_data(config.model, config.lattice.d);

  VerifyResult out;
  out.report = evaluate(ev, data, config.model.coupling_normalization, config.effective_suites());
  const std::string fresh = verification_json(out.report);
  out.identical = fs::exists(directory / "verification.json") &&
                  fresh == read_file(directory / "verification.json");
  out.exit_code = out.report.all_passed() && out.identical ? kExitOk : kExitFailure;
  return out;
}

}  // namespace lsbd

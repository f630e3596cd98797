#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "lsbd/runner.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string out;
  std::optional<double> t;
  std::optional<std::uint64_t> seed;
  bool debug_dump = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "flat-key JSON config")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "artifact directory");
  cmd->add_option("--t", c.t, "override the coupling constant");
  cmd->add_option("--seed", c.seed, "override the seed of randomized checks");
  cmd->add_flag("--debug-dump", c.debug_dump, "dump every intermediate table");
  cmd->add_flag("-q,--quiet", c.quiet, "only warnings and errors");
}

lsbd::RunConfig resolve(const Common& c) {
  lsbd::RunConfig cfg = lsbd::load_config(c.config_path);
  if (const char* env = std::getenv("LSBD_OUT_DIR"); env && *env) cfg.output_directory = env;
  if (!c.out.empty()) cfg.output_directory = c.out;
  if (c.t) cfg.t = *c.t;
  if (c.seed) cfg.seed = *c.seed;
  if (c.debug_dump) cfg.debug_dump = true;
  cfg.validate();
  return cfg;
}

int geometry_command(int d, int n, int l, bool shapes, bool rectangles, bool steps, bool caps) {
  if (shapes) {
    if (l < 0) throw lsbd::ConfigError("--shapes needs --l >= 0");
    const auto list = lsbd::enumerate_shapes(d, l);
    std::cout << list.size() << "\n";
    return 0;
  }
  lsbd::LatticeSpec lattice{d, n};
  try {
    lattice.validate();
  } catch (const lsbd::GeometryError& e) {
    throw lsbd::ConfigError(e.what());
  }
  if (rectangles) {
    const auto all = lsbd::enumerate_rectangles(lattice);
    std::cout << all.size() << "\n";
    for (const auto& r : all) std::cout << r.to_string() << "\n";
  }
  if (steps) {
    const auto seq = lsbd::step_sequence(lattice);
    int i = 0;
    for (const auto& r : seq) std::cout << i++ << " " << r.to_string() << "\n";
  }
  if (caps) {
    // shape count vs (l+1)^(d-1), rectangles inside the full lattice per circumference
    const lsbd::Rectangle full = lsbd::Rectangle::full(lattice);
    const int r = full.circumference();
    std::cout << "l,shapes,shape_cap,rectangles,rectangle_cap\n";
    for (int k = 1; k <= r; ++k) {
      std::size_t count = 0;
      for (const auto& rect : lsbd::enumerate_rectangles(lattice)) count += rect.circumference() == k;
      const double shape_cap = std::pow(k + 1.0, d - 1);
      const double rect_cap = std::pow(r + 1.0, d) * shape_cap;
      std::cout << k << "," << lsbd::enumerate_shapes(d, k).size() << "," << shape_cap << ","
                << count << "," << rect_cap << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-Schwinger block diagonalization on lattice boson models"};
  app.set_version_flag("--version", lsbd::tool_version());
  app.require_subcommand(1);

  Common run_opts, scan_opts;
  auto* run_cmd = app.add_subcommand("run", "block-diagonalize one coupling and verify");
  add_common(run_cmd, run_opts);
  auto* scan_cmd = app.add_subcommand("scan", "run every t of t_grid and report the frontier");
  add_common(scan_cmd, scan_opts);
  std::optional<int> workers;
  scan_cmd->add_option("--workers", workers, "parallel runs")->check(CLI::Range(1, 64));

  std::string verify_dir;
  auto* verify_cmd = app.add_subcommand("verify", "re-evaluate checks from stored artifacts");
  verify_cmd->add_option("--out,dir", verify_dir, "artifact directory")->required();

  int gd = 2, gn = 2, gl = -1;
  bool shapes = false, rects = false, steps = false, caps = false;
  auto* geo_cmd = app.add_subcommand("geometry", "rectangle counting and ordering utilities");
  geo_cmd->add_option("--d", gd, "dimension")->check(CLI::Range(1, 3));
  geo_cmd->add_option("--N", gn, "sites per side");
  geo_cmd->add_option("--l", gl, "circumference");
  geo_cmd->add_flag("--shapes", shapes, "count shapes with circumference l");
  geo_cmd->add_flag("--rectangles", rects, "list rectangles in step order");
  geo_cmd->add_flag("--steps", steps, "list the step sequence");
  geo_cmd->add_flag("--caps", caps, "compare counts with the polynomial caps");

  app.add_subcommand("dump-config-schema", "print the config keys, ranges and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lsbd::kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("lsbd");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  try {
    if (*run_cmd) {
      const lsbd::RunConfig cfg = resolve(run_opts);
      if (run_opts.quiet) spdlog::set_level(spdlog::level::warn);
      return lsbd::run_experiment(cfg);
    }
    if (*scan_cmd) {
      lsbd::RunConfig cfg = resolve(scan_opts);
      if (workers) cfg.scan_workers = *workers;
      if (scan_opts.quiet) spdlog::set_level(spdlog::level::warn);
      return lsbd::run_scan(cfg);
    }
    if (*verify_cmd) {
      const lsbd::VerifyResult r = lsbd::verify_artifacts(verify_dir);
      std::cout << r.report.passed_count() << "/" << r.report.checks.size() << " checks passed; "
                << (r.identical ? "report identical to stored" : "report differs from stored")
                << "\n";
      return r.exit_code;
    }
    if (*geo_cmd) return geometry_command(gd, gn, gl, shapes, rects, steps, caps);
    std::cout << lsbd::config_schema();
    return 0;
  } catch (const lsbd::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return lsbd::kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return lsbd::kExitFailure;
  }
}

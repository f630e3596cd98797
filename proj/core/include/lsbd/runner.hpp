#pragma once

#include <filesystem>
#include <string>

#include "lsbd/artifacts.hpp"
#include "lsbd/config.hpp"

namespace lsbd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

std::string tool_version();

struct Experiment {
  InitialData data;
  RunOutput run;
  Evidence evidence;
  VerificationReport report;
  int exit_code = kExitFailure;
};

// Whole pipeline in memory: model, block diagonalization, oracle, tree audit, checks.
// `on_step` sees each record as soon as its step finishes.
Experiment execute(const RunConfig& config, double t,
                   const std::function<void(const StepRecord&)>& on_step = {});

// Runs and writes every artifact into config.output_directory.
int run_experiment(const RunConfig& config);
int run_scan(const RunConfig& config);

struct VerifyResult {
  VerificationReport report;
  bool identical = false;  // recomputed report equals the stored one byte for byte
  int exit_code = kExitFailure;
};

// Re-evaluates the checks from stored artifacts without rerunning the algorithm.
VerifyResult verify_artifacts(const std::filesystem::path& directory);

}  // namespace lsbd

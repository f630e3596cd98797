#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lsbd/verification.hpp"

namespace lsbd {

inline constexpr int kSchemaVersion = 1;

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// One JSON object per line; wall time is left out so reruns compare equal.
std::string step_record_line(const StepRecord& record);
StepRecord parse_step_record(const std::string& line);
std::vector<StepRecord> parse_step_records(const std::string& text);

// Run header: lattice, t, seed, x_d, initial norms and the normalization report.
std::string initial_json(const Evidence& ev, const NormalizationReport& normalization);
void parse_initial_json(const std::string& text, Evidence& ev);

std::string outcome_json(bool completed, const std::string& error);
void parse_outcome_json(const std::string& text, Evidence& ev);

std::string oracle_json(const OracleReport& oracle);
OracleReport parse_oracle_json(const std::string& text);

std::string tree_audit_json(const TreeAudit& audit);
TreeAudit parse_tree_audit_json(const std::string& text);

std::string verification_json(const VerificationReport& report);
std::string scan_json(const ScanReport& scan);

std::string gap_vs_step_csv(const std::vector<StepRecord>& records);
std::string norm_vs_circumference_csv(const std::vector<KeyNorms>& initial,
                                      const std::vector<StepRecord>& records);
std::string summary_csv(const std::vector<StepRecord>& records, const VerificationReport& report);
std::string t_scan_frontier_csv(const ScanReport& scan);

// Text header line, then per entry a line "<rect> <dim>" followed by
// dim*dim column-major complex doubles.
void write_table_dump(const std::filesystem::path& path, const PotentialTable& table);
PotentialTable read_table_dump(const std::filesystem::path& path);

}  // namespace lsbd

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grwalk/parallel.hpp"

namespace grwalk {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  /// Runtime within the criterion's limit (true when there is none).
  bool runtime_ok = true;
  double seconds = 0.0;  // wall time; kept out of the JSON report
  /// Deterministic JSON object with the worst cases and counts.
  std::string detail;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240917;
  ExecutionPolicy policy;
  /// Criteria to run; empty runs 1..11.
  std::vector<int> only;
  /// Called after each criterion.
  std::function<void(const CriterionResult&)> on_result;
};

/// Library checks for criteria 1..11. Criterion 12 (thread-count
/// independence of the CLI output) needs two processes and lives in the
/// acceptance binary.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// schema_version, report, seed, criteria[], ok. No timings, so reports from
/// different runs compare byte for byte.
std::string acceptance_json(const std::vector<CriterionResult>& results, std::uint64_t seed);

/// "criterion <id> PASS|FAIL <name>" plus the runtime flag when it failed.
std::string acceptance_line(const CriterionResult& r);

}  // namespace grwalk

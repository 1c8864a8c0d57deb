#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "kpline/io.hpp"

namespace kpline {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool breached = false;  // forced to fail by the debug flag
  std::string detail;     // measured values against their limits
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::set<int> only;        // empty: every criterion
  int breach = 0;            // criterion forced to fail (0: none)
  fs::path work_dir;         // scratch space for pipeline runs; empty: a temporary directory
  bool keep_work_dir = false;
  std::function<void(const CriterionResult&)> on_result;
};

int acceptance_criterion_count();
std::string acceptance_criterion_name(int id);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});
json acceptance_json(const std::vector<CriterionResult>& results);
// One line per criterion: "PASS  C3 eigenrelation  ..." .
std::string format_result_line(const CriterionResult& r);

}  // namespace kpline

#pragma once

// Scenario pipeline: runs the requested analyses in dependency order and
// assembles the report.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "statdisc/io.hpp"

namespace statdisc {

struct RunResult {
  ojson report;
  int exit_code = 0;                // 0 all assertions passed, 1 otherwise
  std::vector<std::string> summary;  // one "key=value" line per headline quantity
};

// With out_dir set, report.json and the CSV artifacts are written there.
RunResult run_scenario(const Scenario& scenario,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Chart used for the center and jet analyses: solver-backed when the Gram
// matrix of the witness is positive definite, otherwise the linear chart on
// the numeric constrained kernel at truncation nf.
FamilyChart make_analysis_chart(const DefiningFunction& def, const VectorXcd& V, const VectorXd& c,
                                const SolverConfig& config, int synthetic_nf = 16);

}  // namespace statdisc

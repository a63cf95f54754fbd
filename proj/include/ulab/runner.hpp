#pragma once

#include <string>
#include <vector>

#include "ulab/config.hpp"

namespace ulab::runner {

inline constexpr const char* kToolVersion = "ulab 1.0.0";

struct Validation {
  std::vector<std::string> errors;
  std::vector<std::string> notes;  // accepted-with-normalization messages
  bool ok() const { return errors.empty(); }
};

// Dry run: checks every parameter against the target operation's
// preconditions. No compute, no I/O.
Validation validate(const config::ExperimentConfig& cfg);

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 validation error, 3 budget exceeded, 4 I/O error
  std::vector<std::string> errors;
  std::vector<std::string> notes;
  std::vector<std::string> outputs;  // paths of files written
  std::string manifest_path;
};

// Validates, dispatches to the owning module, writes CSV/SVG outputs and the
// run manifest into cfg.out_dir.
RunResult run(const config::ExperimentConfig& cfg);

}  // namespace ulab::runner

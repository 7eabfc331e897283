#pragma once

#include <filesystem>
#include <string>

#include "fklab/config.hpp"

namespace fklab {

struct RunResult {
  int exit_code = 0;
  std::filesystem::path artifact_dir;
  std::string message;
};

/// Executes the configured command and writes its artifacts atomically
/// (temp directory + rename) into <out>/<command>-<hash>/. The exit code is
/// nonzero iff a hard error occurred or an audited bound exceeded its
/// tolerance. Timing is reported in the manifest and timing.csv; the report
/// CSVs carry only deterministic values.
RunResult run(const RunConfig& cfg, const std::filesystem::path& out_override = {},
              int workers_override = 0, bool seedless = false);

}  // namespace fklab

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "probedrift/pipeline.hpp"

namespace probedrift::cli {

enum ExitCode : int {
  kOk = 0,
  kIngestFailure = 1,
  kAnalysisFailure = 2,
  kEmitFailure = 3,
  kBatchPartialFailure = 4,
};

struct RunConfig {
  std::optional<std::filesystem::path> input;     // UltraSuite speaker directory
  std::optional<std::filesystem::path> manifest;  // manifest.json
  std::optional<std::filesystem::path> spec;      // synthetic spec
  std::filesystem::path out = "probedrift_out";
  std::optional<std::uint64_t> seed;
  AnalysisConfig analysis;
};

/// Entry point shared by the executable and the tests. Summary lines go to
/// `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace probedrift::cli

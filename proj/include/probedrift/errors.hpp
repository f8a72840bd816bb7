#pragma once

#include <stdexcept>
#include <string>

namespace probedrift {

// Each stage of the pipeline throws its own error type so callers (the CLI
// in particular) can map failures to distinct exit codes.

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace probedrift

#pragma once

#include <filesystem>
#include <vector>

#include "probedrift/render.hpp"
#include "probedrift/report.hpp"
#include "probedrift/session.hpp"
#include "probedrift/similarity.hpp"

namespace probedrift {

struct EmitOptions {
  bool heatmaps = false;
  bool wedges = false;
  bool report = false;
  bool stats = false;

  bool any() const { return heatmaps || wedges || report || stats; }
};

struct AnalysisConfig {
  std::vector<Metric> metrics{Metric::Mse, Metric::Ssim, Metric::CwSsim};
  MetricSettings settings;
  ChangePointParams change_points;
  WedgeSpec wedge;
  EmitOptions emit;
  std::filesystem::path out_dir;
  int jobs = 0;
};

/// Mean images, one matrix per requested metric, statistics and change
/// points, then whatever artifacts `config.emit` asks for. Invalid sessions
/// raise one AnalysisError listing every offending utterance; emission
/// failures raise EmitError.
SessionReport analyze_session(const Session& s, const AnalysisConfig& config);

}  // namespace probedrift

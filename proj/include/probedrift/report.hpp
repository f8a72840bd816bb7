#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "probedrift/render.hpp"
#include "probedrift/similarity.hpp"

namespace probedrift {

struct MetricResult {
  SimilarityMatrix matrix;
  std::optional<MetricStats> stats;               // needs n >= 2
  std::optional<ChangePointReport> change_points;  // needs n >= 4
};

struct SessionReport {
  std::string speaker_id;
  std::string session_id;
  std::vector<MetricResult> metrics;
  MetricSettings settings;
  ChangePointParams change_point_params;
  std::vector<std::filesystem::path> emitted;  // relative to the report directory

  const MetricResult* find(Metric m) const;
};

/// "219 (67)" for MSE, "0.19 (0.03)" for the similarity indices.
std::string format_stats(Metric m, const MetricStats& s);

/// Writes `report.json` and one `matrix_<METRIC>.csv` per metric into
/// `dir`; returns the report path. Throws EmitError.
std::filesystem::path write_report(const SessionReport& r, const std::filesystem::path& dir);

SessionReport read_report(const std::filesystem::path& report_json);

/// CSV with utterance ids as the first row and column; the diagonal is `NaN`.
void write_matrix_csv(const SimilarityMatrix& m, const std::filesystem::path& out);
SimilarityMatrix read_matrix_csv(const std::filesystem::path& in, Metric metric);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace probedrift

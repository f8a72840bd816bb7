#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "probedrift/cwssim.hpp"
#include "probedrift/image.hpp"
#include "probedrift/metrics.hpp"
#include "probedrift/session.hpp"

namespace probedrift {

enum class Metric { Mse, Ssim, CwSsim };

inline constexpr Metric kAllMetrics[] = {Metric::Mse, Metric::Ssim, Metric::CwSsim};

std::string_view metric_name(Metric m);
/// Accepts display names ("MSE", "SSIM", "CW-SSIM") and CLI spellings
/// ("mse", "ssim", "cwssim").
std::optional<Metric> parse_metric(std::string_view name);

/// True when larger values mean less similar images.
inline bool is_distance(Metric m) { return m == Metric::Mse; }

/// Pixel-wise arithmetic mean over every frame of the utterance. Sums of
/// 8-bit values are exact in double, so the result does not depend on frame
/// order.
template <typename Scalar = double>
MeanImage<Scalar> mean_image(const Utterance& u) {
  validate_utterance(u);
  Grid<double> acc = Grid<double>::Zero(u.height(), u.width());
  for (const Frame& f : u.frames) {
    acc += Eigen::Map<const Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
               f.pixels.data(), f.height, f.width)
               .cast<double>();
  }
  acc /= double(u.frames.size());
  return MeanImage<Scalar>(acc.cast<Scalar>());
}

struct MetricSettings {
  SsimParams<double> ssim;
  CwSsimParams<double> cwssim;

  friend bool operator==(const MetricSettings&, const MetricSettings&) = default;
};

/// Stable 64-bit hash of the parameters that influence `m`.
std::uint64_t params_fingerprint(Metric m, const MetricSettings& settings);

struct SimilarityMatrix {
  Metric metric = Metric::Mse;
  Eigen::MatrixXd values;  // NaN diagonal
  std::vector<std::string> utterance_ids;
  std::uint64_t params_fingerprint = 0;

  Eigen::Index n() const { return values.rows(); }
};

/// Violations of the matrix invariants (NaN diagonal, exact symmetry, finite
/// off-diagonal); empty when valid.
std::vector<std::string> matrix_problems(const SimilarityMatrix& m);

/// All-pairs matrix over precomputed mean images. Each unordered pair is
/// evaluated once, on up to `jobs` threads, and mirrored.
SimilarityMatrix similarity_matrix(const std::vector<MeanImaged>& images, const std::vector<std::string>& ids,
                                   Metric metric, const MetricSettings& settings = {}, int jobs = 0);

SimilarityMatrix similarity_matrix(const Session& s, Metric metric, const MetricSettings& settings = {},
                                   int jobs = 0);

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;

  friend bool operator==(const MetricStats&, const MetricStats&) = default;
};

/// Mean and population standard deviation of the upper-triangle entries.
/// Throws AnalysisError when n < 2.
MetricStats session_stats(const SimilarityMatrix& m);

struct ChangePointParams {
  double threshold_factor = 1.0;  // times the off-diagonal std of the dissimilarity
  int max_depth = 4;
  int min_segment = 3;  // utterances per block; smaller blocks make the within mean too noisy

  friend bool operator==(const ChangePointParams&, const ChangePointParams&) = default;
};

struct ChangePointReport {
  Metric metric = Metric::Mse;
  std::vector<int> boundaries;
  std::vector<double> block_means;  // within-segment mean of the raw metric
  double threshold_used = 0.0;

  friend bool operator==(const ChangePointReport&, const ChangePointReport&) = default;
};

/// Greedy binary segmentation of the utterance sequence into blocks of
/// mutually similar utterances. A split at k inside [lo, hi) scores
///   cross_mean - (within_mean(lo, k) + within_mean(k, hi)) / 2
/// on the dissimilarity (raw MSE, 1 - value for SSIM and CW-SSIM). The best
/// split is accepted when its score exceeds the threshold; both halves are
/// then searched again down to `max_depth`. Throws AnalysisError when
/// n < 4; sessions shorter than 2 * min_segment yield no boundaries.
ChangePointReport detect_change_points(const SimilarityMatrix& m, const ChangePointParams& p = {});

}  // namespace probedrift

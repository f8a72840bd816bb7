#include <algorithm>
#include <cmath>
#include <limits>

#include "probedrift/errors.hpp"
#include "probedrift/similarity.hpp"

namespace probedrift {

namespace {

// Inclusive-exclusive rectangle sums over a square matrix with zero diagonal.
class BlockSums {
 public:
  explicit BlockSums(const Eigen::MatrixXd& d) : prefix_(Eigen::MatrixXd::Zero(d.rows() + 1, d.cols() + 1)) {
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j)
        prefix_(i + 1, j + 1) = d(i, j) + prefix_(i, j + 1) + prefix_(i + 1, j) - prefix_(i, j);
  }

  double rect(Eigen::Index r0, Eigen::Index r1, Eigen::Index c0, Eigen::Index c1) const {
    return prefix_(r1, c1) - prefix_(r0, c1) - prefix_(r1, c0) + prefix_(r0, c0);
  }

  /// Mean over unordered pairs inside [lo, hi).
  double within_mean(Eigen::Index lo, Eigen::Index hi) const {
    const double size = double(hi - lo);
    return rect(lo, hi, lo, hi) / (size * (size - 1.0));
  }

  double cross_mean(Eigen::Index lo, Eigen::Index mid, Eigen::Index hi) const {
    return rect(lo, mid, mid, hi) / (double(mid - lo) * double(hi - mid));
  }

 private:
  Eigen::MatrixXd prefix_;
};

struct Segmenter {
  const BlockSums& sums;
  const ChangePointParams& params;
  double threshold;
  std::vector<int> boundaries;

  void split(Eigen::Index lo, Eigen::Index hi, int depth) {
    if (depth >= params.max_depth || hi - lo < 2 * params.min_segment) return;
    Eigen::Index best_k = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = lo + params.min_segment; k <= hi - params.min_segment; ++k) {
      const double within = 0.5 * (sums.within_mean(lo, k) + sums.within_mean(k, hi));
      const double score = sums.cross_mean(lo, k, hi) - within;
      if (score > best_score) {
        best_score = score;
        best_k = k;
      }
    }
    if (best_k < 0 || !(best_score > threshold)) return;
    boundaries.push_back(static_cast<int>(best_k));
    split(lo, best_k, depth + 1);
    split(best_k, hi, depth + 1);
  }
};

}  // namespace

ChangePointReport detect_change_points(const SimilarityMatrix& m, const ChangePointParams& p) {
  if (p.min_segment < 2) throw AnalysisError("change points: min_segment must be >= 2");
  if (p.max_depth < 0) throw AnalysisError("change points: max_depth must be >= 0");
  if (!(p.threshold_factor >= 0)) throw AnalysisError("change points: threshold_factor must be >= 0");
  const Eigen::Index n = m.n();
  if (n < 4) throw AnalysisError("change points need at least 4 utterances, got " + std::to_string(n));

  Eigen::MatrixXd dissim(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      dissim(i, j) = i == j ? 0.0 : (is_distance(m.metric) ? m.values(i, j) : 1.0 - m.values(i, j));

  double sum = 0, sq = 0;
  const double pairs = double(n) * double(n - 1) / 2.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sum += dissim(i, j);
  const double mean = sum / pairs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) sq += (dissim(i, j) - mean) * (dissim(i, j) - mean);

  ChangePointReport report;
  report.metric = m.metric;
  report.threshold_used = p.threshold_factor * std::sqrt(sq / pairs);

  const BlockSums sums(dissim);
  Segmenter seg{sums, p, report.threshold_used, {}};
  seg.split(0, n, 0);
  report.boundaries = std::move(seg.boundaries);
  std::sort(report.boundaries.begin(), report.boundaries.end());

  std::vector<Eigen::Index> edges{0};
  for (int b : report.boundaries) edges.push_back(b);
  edges.push_back(n);
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double within = sums.within_mean(edges[s], edges[s + 1]);
    report.block_means.push_back(is_distance(m.metric) ? within : 1.0 - within);
  }
  return report;
}

}  // namespace probedrift

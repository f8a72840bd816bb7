#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "probedrift/errors.hpp"
#include "probedrift/parallel.hpp"
#include "probedrift/similarity.hpp"

namespace probedrift {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Mse: return "MSE";
    case Metric::Ssim: return "SSIM";
    case Metric::CwSsim: return "CW-SSIM";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "MSE" || name == "mse") return Metric::Mse;
  if (name == "SSIM" || name == "ssim") return Metric::Ssim;
  if (name == "CW-SSIM" || name == "cwssim" || name == "cw-ssim" || name == "cw_ssim") return Metric::CwSsim;
  return std::nullopt;
}

namespace {

std::string canonical(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t params_fingerprint(Metric m, const MetricSettings& settings) {
  std::string text(metric_name(m));
  if (m == Metric::Ssim) {
    const auto& p = settings.ssim;
    text += ";window=" + std::to_string(p.window_size) + ";sigma=" + canonical(p.gaussian_sigma) +
            ";alpha=" + canonical(p.alpha) + ";beta=" + canonical(p.beta) + ";gamma=" + canonical(p.gamma) +
            ";k1=" + canonical(p.k1) + ";k2=" + canonical(p.k2) + ";range=" + canonical(p.dynamic_range);
  } else if (m == Metric::CwSsim) {
    const auto& p = settings.cwssim;
    text += ";K=" + canonical(p.k_stabilizer) + ";scales=" + std::to_string(p.n_scales) +
            ";orientations=" + std::to_string(p.n_orientations) + ";level=" + std::to_string(p.comparison_level) +
            ";window=" + std::to_string(p.local_window);
  }
  return fnv1a(text);
}

std::vector<std::string> matrix_problems(const SimilarityMatrix& m) {
  std::vector<std::string> problems;
  const Eigen::Index n = m.n();
  if (m.values.cols() != n) problems.emplace_back("matrix is not square");
  if (static_cast<Eigen::Index>(m.utterance_ids.size()) != n) problems.emplace_back("id count differs from n");
  if (!problems.empty()) return problems;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isnan(m.values(i, i))) problems.push_back("diagonal entry " + std::to_string(i) + " is not NaN");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = m.values(i, j), b = m.values(j, i);
      if (!std::isfinite(a) || !std::isfinite(b))
        problems.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
      else if (a != b)
        problems.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not symmetric");
    }
  }
  return problems;
}

SimilarityMatrix similarity_matrix(const std::vector<MeanImaged>& images, const std::vector<std::string>& ids,
                                   Metric metric, const MetricSettings& settings, int jobs) {
  const std::size_t n = images.size();
  if (n == 0) throw AnalysisError("similarity matrix needs at least one utterance");
  if (ids.size() != n) throw AnalysisError("similarity matrix: id count differs from image count");
  {
    std::string msg;
    for (std::size_t i = 1; i < n; ++i)
      if (images[i].width() != images[0].width() || images[i].height() != images[0].height())
        msg += "\n  '" + ids[i] + "' is " + std::to_string(images[i].height()) + "x" +
               std::to_string(images[i].width());
    if (!msg.empty())
      throw AnalysisError("mean image dimensions differ from '" + ids[0] + "' (" +
                          std::to_string(images[0].height()) + "x" + std::to_string(images[0].width()) + "):" + msg);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> results(pairs.size());

  try {
    switch (metric) {
      case Metric::Mse:
        parallel_for(pairs.size(), jobs, [&](std::size_t k) {
          results[k] = mse(images[pairs[k].first], images[pairs[k].second]);
        });
        break;
      case Metric::Ssim: {
        std::vector<SsimMoments<double>> moments(n);
        parallel_for(n, jobs, [&](std::size_t i) { moments[i] = ssim_moments(images[i], settings.ssim); });
        parallel_for(pairs.size(), jobs, [&](std::size_t k) {
          results[k] = ssim(moments[pairs[k].first], moments[pairs[k].second], settings.ssim);
        });
        break;
      }
      case Metric::CwSsim: {
        std::vector<CwSsimCoefficients<double>> coeffs(n);
        parallel_for(n, jobs, [&](std::size_t i) { coeffs[i] = cw_ssim_coefficients(images[i], settings.cwssim); });
        parallel_for(pairs.size(), jobs, [&](std::size_t k) {
          results[k] = cw_ssim(coeffs[pairs[k].first], coeffs[pairs[k].second], settings.cwssim);
        });
        break;
      }
    }
  } catch (const std::invalid_argument& e) {
    throw AnalysisError(std::string(metric_name(metric)) + ": " + e.what());
  }

  SimilarityMatrix m;
  m.metric = metric;
  m.utterance_ids = ids;
  m.params_fingerprint = params_fingerprint(metric, settings);
  m.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n),
                                       std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = results[k];
    m.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = results[k];
  }
  return m;
}

SimilarityMatrix similarity_matrix(const Session& s, Metric metric, const MetricSettings& settings, int jobs) {
  const auto problems = session_problems(s);
  if (!problems.empty()) {
    std::string msg = "invalid session";
    for (const auto& p : problems) msg += "\n  " + p;
    throw AnalysisError(msg);
  }
  std::vector<MeanImaged> images;
  std::vector<std::string> ids;
  images.reserve(s.size());
  for (const Utterance& u : s.utterances) {
    images.push_back(mean_image(u));
    ids.push_back(u.id);
  }
  return similarity_matrix(images, ids, metric, settings, jobs);
}

MetricStats session_stats(const SimilarityMatrix& m) {
  const Eigen::Index n = m.n();
  if (n < 2) throw AnalysisError("session statistics need at least 2 utterances");
  double sum = 0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += m.values(i, j);
      ++count;
    }
  const double mean = sum / double(count);
  double sq = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = m.values(i, j) - mean;
      sq += d * d;
    }
  return {mean, std::sqrt(sq / double(count))};
}

}  // namespace probedrift

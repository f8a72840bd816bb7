#include <fstream>

#include "probedrift/errors.hpp"
#include "probedrift/parallel.hpp"
#include "probedrift/pipeline.hpp"

namespace fs = std::filesystem;

namespace probedrift {

SessionReport analyze_session(const Session& s, const AnalysisConfig& config) {
  const auto problems = session_problems(s);
  if (!problems.empty()) {
    std::string msg = "invalid session '" + s.speaker_id + "'";
    for (const auto& p : problems) msg += "\n  " + p;
    throw AnalysisError(msg);
  }
  if (config.metrics.empty()) throw AnalysisError("no metrics requested");

  std::vector<std::optional<MeanImaged>> slots(s.size());
  parallel_for(s.size(), config.jobs, [&](std::size_t i) { slots[i] = mean_image(s.utterances[i]); });
  std::vector<MeanImaged> images;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < s.size(); ++i) {
    images.push_back(std::move(*slots[i]));
    ids.push_back(s.utterances[i].id);
  }

  SessionReport report;
  report.speaker_id = s.speaker_id;
  report.session_id = s.session_id;
  report.settings = config.settings;
  report.change_point_params = config.change_points;
  const auto n = static_cast<Eigen::Index>(images.size());
  for (Metric metric : config.metrics) {
    MetricResult res;
    res.matrix = similarity_matrix(images, ids, metric, config.settings, config.jobs);
    if (n >= 2) res.stats = session_stats(res.matrix);
    if (n >= 4) res.change_points = detect_change_points(res.matrix, config.change_points);
    report.metrics.push_back(std::move(res));
  }

  if (!config.emit.any()) return report;
  const fs::path& out = config.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw EmitError("cannot create output directory " + out.string());

  try {
    if (config.emit.heatmaps) {
      for (const auto& res : report.metrics) {
        const fs::path name = "heatmap_" + std::string(metric_name(res.matrix.metric)) + ".png";
        render_heatmap(res.matrix, default_heatmap_spec(res.matrix.metric), out / name);
        report.emitted.push_back(name);
      }
    }
    if (config.emit.wedges) {
      fs::create_directories(out / "wedges", ec);
      if (ec) throw EmitError("cannot create " + (out / "wedges").string());
      std::vector<fs::path> names(images.size());
      parallel_for(images.size(), config.jobs, [&](std::size_t i) {
        names[i] = fs::path("wedges") / (ids[i] + ".png");
        render_wedge(images[i], config.wedge, out / names[i]);
      });
      report.emitted.insert(report.emitted.end(), names.begin(), names.end());
    }
    if (config.emit.stats) {
      const fs::path name = "stats.txt";
      std::ofstream f(out / name);
      for (const auto& res : report.metrics)
        if (res.stats) f << metric_name(res.matrix.metric) << ' ' << format_stats(res.matrix.metric, *res.stats) << '\n';
      if (!f) throw EmitError("failed writing " + (out / name).string());
      report.emitted.push_back(name);
    }
    if (config.emit.report) {
      for (const auto& res : report.metrics)
        report.emitted.emplace_back("matrix_" + std::string(metric_name(res.matrix.metric)) + ".csv");
      report.emitted.emplace_back("report.json");
      write_report(report, out);
    }
  } catch (const std::invalid_argument& e) {
    throw EmitError(e.what());
  }
  return report;
}

}  // namespace probedrift

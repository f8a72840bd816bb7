#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "probedrift/errors.hpp"
#include "probedrift/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace probedrift {

const MetricResult* SessionReport::find(Metric m) const {
  for (const auto& r : metrics)
    if (r.matrix.metric == m) return &r;
  return nullptr;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw EmitError("cannot format number");
  return std::string(buf, ptr);
}

std::string format_stats(Metric m, const MetricStats& s) {
  char buf[64];
  if (is_distance(m))
    std::snprintf(buf, sizeof buf, "%.0f (%.0f)", s.mean, s.std);
  else
    std::snprintf(buf, sizeof buf, "%.2f (%.2f)", s.mean, s.std);
  return buf;
}

namespace {

std::string matrix_csv_name(Metric m) { return "matrix_" + std::string(metric_name(m)) + ".csv"; }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& where) {
  if (cell == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) throw EmitError(where + ": bad number '" + cell + "'");
  return v;
}

json settings_json(const MetricSettings& s, const ChangePointParams& cp) {
  const auto& a = s.ssim;
  const auto& c = s.cwssim;
  return {
      {"ssim",
       {{"window_size", a.window_size}, {"gaussian_sigma", a.gaussian_sigma}, {"alpha", a.alpha}, {"beta", a.beta},
        {"gamma", a.gamma}, {"k1", a.k1}, {"k2", a.k2}, {"dynamic_range", a.dynamic_range},
        {"boundary", "valid windows only"}}},
      {"cwssim",
       {{"k_stabilizer", c.k_stabilizer}, {"n_scales", c.n_scales}, {"n_orientations", c.n_orientations},
        {"comparison_level", c.comparison_level}, {"local_window", c.local_window},
        {"transform", "complex steerable pyramid (raised-cosine radial, cos^(K-1) angular, FFT)"}}},
      {"change_points",
       {{"threshold_factor", cp.threshold_factor}, {"max_depth", cp.max_depth}, {"min_segment", cp.min_segment}}},
      {"stats_population", "upper-triangle off-diagonal entries, population standard deviation"},
  };
}

}  // namespace

void write_matrix_csv(const SimilarityMatrix& m, const fs::path& out) {
  std::ofstream csv(out);
  if (!csv) throw EmitError("cannot open " + out.string() + " for writing");
  csv << "id";
  for (const auto& id : m.utterance_ids) csv << ',' << id;
  csv << '\n';
  for (Eigen::Index i = 0; i < m.n(); ++i) {
    csv << m.utterance_ids[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.n(); ++j) csv << ',' << format_double(m.values(i, j));
    csv << '\n';
  }
  if (!csv) throw EmitError("failed writing " + out.string());
}

SimilarityMatrix read_matrix_csv(const fs::path& in, Metric metric) {
  std::ifstream csv(in);
  if (!csv) throw EmitError("cannot open " + in.string());
  std::string line;
  if (!std::getline(csv, line)) throw EmitError(in.string() + ": empty");
  auto header = split_csv(line);
  SimilarityMatrix m;
  m.metric = metric;
  m.utterance_ids.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(m.utterance_ids.size());
  m.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(csv, line)) throw EmitError(in.string() + ": missing row " + std::to_string(i));
    const auto cells = split_csv(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1) throw EmitError(in.string() + ": ragged row " + std::to_string(i));
    for (Eigen::Index j = 0; j < n; ++j) m.values(i, j) = parse_cell(cells[static_cast<std::size_t>(j + 1)], in.string());
  }
  return m;
}

fs::path write_report(const SessionReport& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw EmitError("cannot create " + dir.string() + ": " + ec.message());

  json doc;
  doc["speaker_id"] = r.speaker_id;
  doc["session_id"] = r.session_id;
  doc["parameters"] = settings_json(r.settings, r.change_point_params);
  doc["metrics"] = json::array();
  for (const MetricResult& res : r.metrics) {
    const SimilarityMatrix& m = res.matrix;
    json entry;
    entry["metric"] = std::string(metric_name(m.metric));
    entry["params_fingerprint"] = hex64(m.params_fingerprint);
    entry["utterance_ids"] = m.utterance_ids;
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.n(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < m.n(); ++j) {
        const double v = m.values(i, j);
        row.push_back(std::isnan(v) ? json(nullptr) : json(v));
      }
      rows.push_back(std::move(row));
    }
    entry["values"] = std::move(rows);
    if (res.stats)
      entry["stats"] = {{"mean", res.stats->mean}, {"std", res.stats->std},
                        {"summary", format_stats(m.metric, *res.stats)}};
    if (res.change_points)
      entry["change_points"] = {{"boundaries", res.change_points->boundaries},
                                {"block_means", res.change_points->block_means},
                                {"threshold_used", res.change_points->threshold_used}};
    entry["matrix_csv"] = matrix_csv_name(m.metric);
    doc["metrics"].push_back(std::move(entry));
    write_matrix_csv(m, dir / matrix_csv_name(m.metric));
  }
  doc["emitted"] = json::array();
  for (const auto& p : r.emitted) doc["emitted"].push_back(p.generic_string());

  const fs::path out = dir / "report.json";
  std::ofstream f(out);
  if (!f) throw EmitError("cannot open " + out.string() + " for writing");
  f << doc.dump(2) << '\n';
  if (!f) throw EmitError("failed writing " + out.string());
  return out;
}

SessionReport read_report(const fs::path& report_json) {
  std::ifstream f(report_json);
  if (!f) throw EmitError("cannot open " + report_json.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw EmitError(report_json.string() + ": " + e.what());
  }
  try {
    SessionReport r;
    r.speaker_id = doc.at("speaker_id").get<std::string>();
    r.session_id = doc.at("session_id").get<std::string>();
    const json& params = doc.at("parameters");
    const json& s = params.at("ssim");
    auto& a = r.settings.ssim;
    a.window_size = s.at("window_size").get<int>();
    a.gaussian_sigma = s.at("gaussian_sigma").get<double>();
    a.alpha = s.at("alpha").get<double>();
    a.beta = s.at("beta").get<double>();
    a.gamma = s.at("gamma").get<double>();
    a.k1 = s.at("k1").get<double>();
    a.k2 = s.at("k2").get<double>();
    a.dynamic_range = s.at("dynamic_range").get<double>();
    const json& c = params.at("cwssim");
    auto& w = r.settings.cwssim;
    w.k_stabilizer = c.at("k_stabilizer").get<double>();
    w.n_scales = c.at("n_scales").get<int>();
    w.n_orientations = c.at("n_orientations").get<int>();
    w.comparison_level = c.at("comparison_level").get<int>();
    w.local_window = c.at("local_window").get<int>();
    const json& cp = params.at("change_points");
    r.change_point_params.threshold_factor = cp.at("threshold_factor").get<double>();
    r.change_point_params.max_depth = cp.at("max_depth").get<int>();
    r.change_point_params.min_segment = cp.at("min_segment").get<int>();

    for (const json& entry : doc.at("metrics")) {
      const auto metric = parse_metric(entry.at("metric").get<std::string>());
      if (!metric) throw EmitError(report_json.string() + ": unknown metric");
      MetricResult res;
      res.matrix.metric = *metric;
      res.matrix.params_fingerprint = std::stoull(entry.at("params_fingerprint").get<std::string>(), nullptr, 16);
      res.matrix.utterance_ids = entry.at("utterance_ids").get<std::vector<std::string>>();
      const json& rows = entry.at("values");
      const auto n = static_cast<Eigen::Index>(rows.size());
      res.matrix.values.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const json& v = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
          res.matrix.values(i, j) = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        }
      if (entry.contains("stats"))
        res.stats = MetricStats{entry["stats"].at("mean").get<double>(), entry["stats"].at("std").get<double>()};
      if (entry.contains("change_points")) {
        ChangePointReport cr;
        cr.metric = *metric;
        cr.boundaries = entry["change_points"].at("boundaries").get<std::vector<int>>();
        cr.block_means = entry["change_points"].at("block_means").get<std::vector<double>>();
        cr.threshold_used = entry["change_points"].at("threshold_used").get<double>();
        res.change_points = std::move(cr);
      }
      r.metrics.push_back(std::move(res));
    }
    for (const json& p : doc.at("emitted")) r.emitted.emplace_back(p.get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw EmitError(report_json.string() + ": " + e.what());
  }
}

}  // namespace probedrift

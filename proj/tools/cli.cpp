#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "probedrift/errors.hpp"
#include "probedrift/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace probedrift::cli {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) items.push_back(item);
  return items;
}

std::vector<Metric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<Metric> metrics;
  for (const auto& name : names) {
    const auto m = parse_metric(name);
    if (!m) throw ConfigError("unknown metric '" + name + "' (expected mse, ssim, cwssim)");
    if (std::find(metrics.begin(), metrics.end(), *m) == metrics.end()) metrics.push_back(*m);
  }
  if (metrics.empty()) throw ConfigError("--metrics needs at least one metric");
  return metrics;
}

EmitOptions parse_emit(const std::vector<std::string>& names) {
  EmitOptions e;
  for (const auto& name : names) {
    if (name == "heatmaps") e.heatmaps = true;
    else if (name == "wedges") e.wedges = true;
    else if (name == "report") e.report = true;
    else if (name == "stats") e.stats = true;
    else if (name == "none") continue;
    else throw ConfigError("unknown artifact '" + name + "' (expected heatmaps, wedges, report, stats)");
  }
  return e;
}

std::vector<std::string> json_list(const json& v, const std::string& key) {
  if (v.is_string()) return split_list(v.get<std::string>());
  if (v.is_array()) return v.get<std::vector<std::string>>();
  throw ConfigError("config '" + key + "' must be a string or array");
}

template <typename T>
void take(const json& obj, const char* key, T& dst) {
  if (obj.contains(key)) dst = obj[key].get<T>();
}

/// Applies a JSON config file; command-line values are applied afterwards
/// and therefore win.
void apply_config_file(const fs::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    if (!doc.is_object()) throw ConfigError(path.string() + ": top level must be an object");
    if (doc.contains("input")) cfg.input = doc["input"].get<std::string>();
    if (doc.contains("manifest")) cfg.manifest = doc["manifest"].get<std::string>();
    if (doc.contains("spec")) cfg.spec = doc["spec"].get<std::string>();
    if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    take(doc, "jobs", cfg.analysis.jobs);
    if (doc.contains("metrics")) cfg.analysis.metrics = parse_metrics(json_list(doc["metrics"], "metrics"));
    if (doc.contains("emit")) cfg.analysis.emit = parse_emit(json_list(doc["emit"], "emit"));
    if (doc.contains("ssim")) {
      const json& s = doc["ssim"];
      auto& p = cfg.analysis.settings.ssim;
      take(s, "window_size", p.window_size);
      take(s, "gaussian_sigma", p.gaussian_sigma);
      take(s, "alpha", p.alpha);
      take(s, "beta", p.beta);
      take(s, "gamma", p.gamma);
      take(s, "k1", p.k1);
      take(s, "k2", p.k2);
      take(s, "dynamic_range", p.dynamic_range);
    }
    if (doc.contains("cwssim")) {
      const json& c = doc["cwssim"];
      auto& p = cfg.analysis.settings.cwssim;
      take(c, "k_stabilizer", p.k_stabilizer);
      take(c, "n_scales", p.n_scales);
      take(c, "n_orientations", p.n_orientations);
      take(c, "comparison_level", p.comparison_level);
      take(c, "local_window", p.local_window);
    }
    if (doc.contains("change_points")) {
      const json& c = doc["change_points"];
      take(c, "threshold_factor", cfg.analysis.change_points.threshold_factor);
      take(c, "max_depth", cfg.analysis.change_points.max_depth);
      take(c, "min_segment", cfg.analysis.change_points.min_segment);
    }
    if (doc.contains("wedge")) {
      const json& w = doc["wedge"];
      take(w, "angle_span", cfg.analysis.wedge.angle_span);
      take(w, "zero_offset", cfg.analysis.wedge.zero_offset);
      take(w, "output_size", cfg.analysis.wedge.output_size);
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Raw command-line values; empty optionals mean "not given".
struct Flags {
  std::string input, manifest, spec, out, metrics, emit, config;
  std::uint64_t seed = 0;
  int jobs = 0;
  int ssim_window = 0;
  double ssim_sigma = 0, cw_k = 0, cp_threshold = 0;
  int cw_scales = 0, cw_orientations = 0, cw_level = 0, cw_window = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, Flags& f, bool with_inputs) {
  if (with_inputs) {
    cmd->add_option("--input", f.input, "UltraSuite speaker directory (.ult + .param pairs)");
    cmd->add_option("--manifest", f.manifest, "Session manifest (JSON)");
  }
  cmd->add_option("--spec", f.spec, "Synthetic session spec (JSON)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--metrics", f.metrics, "Comma-separated subset of mse,ssim,cwssim");
  cmd->add_option("--emit", f.emit, "Comma-separated subset of heatmaps,wedges,report,stats");
  f.seed_opt = cmd->add_option("--seed", f.seed, "Seed for synthetic sessions (overrides texture_seed)");
  f.jobs_opt = cmd->add_option("--jobs", f.jobs, "Worker threads for pairwise metrics (0 = all cores)");
  cmd->add_option("--config", f.config, "JSON config file; command-line flags win");
  cmd->add_option("--ssim-window", f.ssim_window, "SSIM Gaussian window side");
  cmd->add_option("--ssim-sigma", f.ssim_sigma, "SSIM Gaussian standard deviation");
  cmd->add_option("--cwssim-k", f.cw_k, "CW-SSIM stabilizing constant K");
  cmd->add_option("--cwssim-scales", f.cw_scales, "CW-SSIM pyramid scales");
  cmd->add_option("--cwssim-orientations", f.cw_orientations, "CW-SSIM orientations per scale");
  cmd->add_option("--cwssim-level", f.cw_level, "CW-SSIM comparison scale");
  cmd->add_option("--cwssim-window", f.cw_window, "CW-SSIM local window side");
  cmd->add_option("--cp-threshold", f.cp_threshold, "Change-point threshold factor (x off-diagonal std)");
}

RunConfig resolve(const Flags& f, CLI::App* cmd) {
  RunConfig cfg;
  cfg.analysis.emit = EmitOptions{true, false, true, true};
  if (!f.config.empty()) apply_config_file(f.config, cfg);
  auto given = [&](const char* name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--input")) cfg.input = f.input;
  if (given("--manifest")) cfg.manifest = f.manifest;
  if (given("--spec")) cfg.spec = f.spec;
  if (given("--out")) cfg.out = f.out;
  if (given("--metrics")) cfg.analysis.metrics = parse_metrics(split_list(f.metrics));
  if (given("--emit")) cfg.analysis.emit = parse_emit(split_list(f.emit));
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--jobs")) cfg.analysis.jobs = f.jobs;
  if (given("--ssim-window")) cfg.analysis.settings.ssim.window_size = f.ssim_window;
  if (given("--ssim-sigma")) cfg.analysis.settings.ssim.gaussian_sigma = f.ssim_sigma;
  if (given("--cwssim-k")) cfg.analysis.settings.cwssim.k_stabilizer = f.cw_k;
  if (given("--cwssim-scales")) cfg.analysis.settings.cwssim.n_scales = f.cw_scales;
  if (given("--cwssim-orientations")) cfg.analysis.settings.cwssim.n_orientations = f.cw_orientations;
  if (given("--cwssim-level")) cfg.analysis.settings.cwssim.comparison_level = f.cw_level;
  if (given("--cwssim-window")) cfg.analysis.settings.cwssim.local_window = f.cw_window;
  if (given("--cp-threshold")) cfg.analysis.change_points.threshold_factor = f.cp_threshold;
  cfg.analysis.out_dir = cfg.out;
  return cfg;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IngestError("spec file not found: " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SyntheticSpec load_spec(const fs::path& p, const std::optional<std::uint64_t>& seed) {
  SyntheticSpec spec;
  try {
    spec = parse_synthetic_spec(read_text(p));
  } catch (const std::invalid_argument& e) {
    throw IngestError(p.string() + ": " + e.what());
  }
  if (seed) spec.texture_seed = *seed;
  return spec;
}

Session load_session(const RunConfig& cfg) {
  const int modes = int(cfg.input.has_value()) + int(cfg.manifest.has_value()) + int(cfg.spec.has_value());
  if (modes != 1) throw IngestError("exactly one of --input, --manifest, --spec is required");
  if (cfg.input) return load_ultrasuite_session(*cfg.input);
  if (cfg.manifest) return load_manifest_session(*cfg.manifest);
  return generate_synthetic_session(load_spec(*cfg.spec, cfg.seed));
}

/// Loads, analyses and emits; returns the exit status and, on success, the
/// report.
int analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err, SessionReport* result = nullptr) {
  Session session;
  try {
    session = load_session(cfg);
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kIngestFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kIngestFailure;
  }
  SessionReport report;
  try {
    report = analyze_session(session, cfg.analysis);
  } catch (const EmitError& e) {
    err << "error: " << e.what() << '\n';
    return kEmitFailure;
  } catch (const AnalysisError& e) {
    err << "error: " << e.what() << '\n';
    return kAnalysisFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kAnalysisFailure;
  }
  for (const auto& res : report.metrics) {
    if (res.stats) out << metric_name(res.matrix.metric) << ' ' << format_stats(res.matrix.metric, *res.stats) << '\n';
    else out << metric_name(res.matrix.metric) << " n/a (fewer than 2 utterances)\n";
  }
  if (result) *result = std::move(report);
  return kOk;
}

int synth(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.spec) {
    err << "error: synth requires --spec\n";
    return kIngestFailure;
  }
  try {
    const SyntheticSpec spec = load_spec(*cfg.spec, cfg.seed);
    const fs::path manifest = write_manifest_session(generate_synthetic_session(spec), cfg.out);
    out << manifest.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIngestFailure;
  }
  return kOk;
}

int batch(const RunConfig& base, const fs::path& root, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(root)) {
    err << "error: batch root not found: " << root.string() << '\n';
    return kIngestFailure;
  }
  std::vector<fs::path> speakers;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) speakers.push_back(entry.path());
  std::sort(speakers.begin(), speakers.end());

  struct Row {
    std::string speaker;
    SessionReport report;
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::string, int>> failures;
  for (const fs::path& dir : speakers) {
    RunConfig cfg = base;
    cfg.input.reset();
    cfg.manifest.reset();
    cfg.spec.reset();
    if (fs::is_regular_file(dir / "manifest.json")) cfg.manifest = dir / "manifest.json";
    else cfg.input = dir;
    const std::string name = dir.filename().string();
    cfg.out = base.out / name;
    cfg.analysis.out_dir = cfg.out;
    std::ostringstream summary;
    Row row{name, {}};
    const int status = analyze(cfg, summary, err, &row.report);
    if (status != kOk) {
      failures.emplace_back(name, status);
      continue;
    }
    rows.push_back(std::move(row));
  }

  const auto& metrics = base.analysis.metrics;
  std::error_code ec;
  fs::create_directories(base.out, ec);
  std::ofstream csv(base.out / "table.csv");
  csv << "speaker";
  out << "speaker";
  for (Metric m : metrics) {
    csv << ',' << metric_name(m) << "_mean," << metric_name(m) << "_std";
    out << '\t' << metric_name(m) << " mean (std)";
  }
  csv << '\n';
  out << '\n';
  for (const Row& row : rows) {
    csv << row.speaker;
    out << row.speaker;
    for (Metric m : metrics) {
      const MetricResult* res = row.report.find(m);
      if (res && res->stats) {
        csv << ',' << format_double(res->stats->mean) << ',' << format_double(res->stats->std);
        out << '\t' << format_stats(m, *res->stats);
      } else {
        csv << ",,";
        out << "\tn/a";
      }
    }
    csv << '\n';
    out << '\n';
  }
  if (!csv) {
    err << "error: failed writing " << (base.out / "table.csv").string() << '\n';
    return kEmitFailure;
  }
  if (failures.empty()) return kOk;
  err << failures.size() << " speaker(s) failed:\n";
  for (const auto& [name, status] : failures) err << "  " << name << " (exit " << status << ")\n";
  return kBatchPartialFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantify ultrasound transducer misalignment across a recording session"};
  app.require_subcommand(1);

  Flags analyze_flags, synth_flags, batch_flags;
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Analyse one session");
  add_common_flags(analyze_cmd, analyze_flags, true);

  CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic session as a manifest");
  add_common_flags(synth_cmd, synth_flags, false);

  CLI::App* batch_cmd = app.add_subcommand("batch", "Analyse every speaker directory under a root");
  std::string batch_root;
  batch_cmd->add_option("root", batch_root, "Directory with one sub-directory per speaker");
  add_common_flags(batch_cmd, batch_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (analyze_cmd->parsed()) return analyze(resolve(analyze_flags, analyze_cmd), out, err);
    if (synth_cmd->parsed()) return synth(resolve(synth_flags, synth_cmd), out, err);
    RunConfig cfg = resolve(batch_flags, batch_cmd);
    fs::path root = batch_root;
    if (root.empty() && cfg.input) root = *cfg.input;
    if (root.empty()) {
      err << "error: batch requires a root directory\n";
      return kIngestFailure;
    }
    return batch(cfg, root, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kIngestFailure;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kIngestFailure;
  }
}

}  // namespace probedrift::cli

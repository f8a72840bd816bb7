#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "oracles.hpp"
#include "probedrift/parallel.hpp"
#include "probedrift/pipeline.hpp"
#include "probedrift/similarity.hpp"
#include "scratch.hpp"

using namespace probedrift;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Verdict metric_identities() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> rows(16, 63), cols(16, 412);
  int bad = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const int h = i == 0 ? 16 : i == 1 ? 63 : rows(rng);
    const int w = i == 0 ? 16 : i == 1 ? 412 : cols(rng);
    const auto x = oracle::random_image(w, h, 1000 + std::uint64_t(i));
    const double s = std::abs(ssim(x, x) - 1.0), c = std::abs(cw_ssim(x, x) - 1.0);
    worst = std::max({worst, s, c});
    if (mse(x, x) != 0.0 || s > 1e-9 || c > 1e-9) ++bad;
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 30 ? Outcome::Pass : Outcome::Fail,
          fmt("%d/50 failures, max |1-index| %.2e, %.1f s", bad, worst, t)};
}

Verdict oracle_equivalence() {
  const CwSsimParams<double> p;
  double worst[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto a = oracle::random_image(32, 32, 500 + seed);
    const auto b = seed % 2 ? oracle::textured_image(32, 32, 600 + seed) : oracle::random_image(32, 32, 600 + seed);
    auto rel = [](double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); };
    worst[0] = std::max(worst[0], rel(mse(a, b), oracle::mse(a, b)));
    worst[1] = std::max(worst[1], rel(ssim(a, b), oracle::ssim(a, b)));
    const double cw_want = oracle::cw_ssim(decompose_level(a, p, p.comparison_level),
                                           decompose_level(b, p, p.comparison_level), p.k_stabilizer, p.local_window);
    worst[2] = std::max(worst[2], rel(cw_ssim(a, b), cw_want));
  }
  const bool ok = worst[0] <= 1e-7 && worst[1] <= 1e-7 && worst[2] <= 1e-7;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("max relative error MSE %.1e, SSIM %.1e, CW-SSIM %.1e", worst[0], worst[1], worst[2])};
}

Verdict analytic_ssim() {
  const MeanImaged black(Grid<double>::Constant(16, 16, 0.0)), white(Grid<double>::Constant(16, 16, 255.0));
  const double want = 6.5025 / 65031.5025, got = ssim(black, white);
  return {std::abs(got - want) <= 1e-9 ? Outcome::Pass : Outcome::Fail, fmt("ssim = %.6e, expected %.6e", got, want)};
}

Verdict translation_robustness() {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto a = oracle::textured_image(64, 64, 300 + seed);
    bool ok = true;
    for (int shift : {1, 2}) {
      const MeanImaged b(oracle::shift_rows_cols(a.pixels(), 0, shift));
      ok = ok && (1.0 - cw_ssim(a, b) < 1.0 - ssim(a, b));
    }
    wins += ok;
  }
  return {wins >= 19 ? Outcome::Pass : Outcome::Fail, fmt("%d/20 textures, 1- and 2-pixel shifts", wins)};
}

Verdict synthetic_detection() {
  const auto t0 = Clock::now();
  const int n = 12;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> where(3, n - 3), magnitude(2, 3), coin(0, 1);
  int hits[3] = {0, 0, 0}, clean[3] = {0, 0, 0};
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticSpec spec;
    spec.n_utterances = n;
    spec.noise_sigma = 2.0;
    spec.texture_seed = 10'000 + std::uint64_t(trial);
    const int index = where(rng), d = magnitude(rng) * (coin(rng) ? 1 : -1);
    spec.shift_boundaries = {coin(rng) ? ShiftBoundary{index, d, 0} : ShiftBoundary{index, 0, d}};
    const Session shifted = generate_synthetic_session(spec);
    spec.shift_boundaries.clear();
    spec.texture_seed += 50'000;
    const Session null = generate_synthetic_session(spec);
    for (int k = 0; k < 3; ++k) {
      const auto got = detect_change_points(similarity_matrix(shifted, kAllMetrics[k])).boundaries;
      hits[k] += got.size() == 1 && std::abs(got[0] - index) <= 1;
      clean[k] += detect_change_points(similarity_matrix(null, kAllMetrics[k])).boundaries.empty();
    }
  }
  const double t = seconds_since(t0);
  bool ok = t < 120;
  for (int k = 0; k < 3; ++k) ok = ok && hits[k] >= 95 && clean[k] >= 95;
  return {ok ? Outcome::Pass : Outcome::Fail,
          fmt("hits MSE %d, SSIM %d, CW-SSIM %d; clean MSE %d, SSIM %d, CW-SSIM %d (of 100); %.1f s", hits[0],
              hits[1], hits[2], clean[0], clean[1], clean[2], t)};
}

Verdict matrix_invariants() {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> count(1, 9), shift(-4, 4);
  std::uniform_real_distribution<double> noise(0.0, 8.0);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticSpec spec;
    spec.n_utterances = count(rng);
    spec.frames_per_utterance = 2;
    spec.width = 40;
    spec.height = 32;
    spec.noise_sigma = noise(rng);
    spec.texture_seed = 7000 + std::uint64_t(trial);
    if (spec.n_utterances > 1) spec.shift_boundaries = {{1 + trial % (spec.n_utterances - 1), shift(rng), shift(rng)}};
    const Session s = generate_synthetic_session(spec);
    std::vector<std::size_t> perm(s.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Session p = s;
    for (std::size_t i = 0; i < perm.size(); ++i) p.utterances[i] = s.utterances[perm[i]];
    for (Metric m : kAllMetrics) {
      const auto a = similarity_matrix(s, m);
      const auto b = similarity_matrix(p, m);
      bool ok = matrix_problems(a).empty() && matrix_problems(b).empty();
      for (std::size_t i = 0; i < perm.size(); ++i) {
        ok = ok && b.utterance_ids[i] == a.utterance_ids[perm[i]];
        for (std::size_t j = 0; j < perm.size(); ++j)
          if (i != j)
            ok = ok && b.values(Eigen::Index(i), Eigen::Index(j)) ==
                           a.values(Eigen::Index(perm[i]), Eigen::Index(perm[j]));
      }
      failures += !ok;
    }
  }
  return {failures == 0 ? Outcome::Pass : Outcome::Fail,
          fmt("%d violations over 100 sessions x 3 metrics", failures)};
}

Verdict dataset_reproduction() {
  const char* root_env = std::getenv("UXTD_ROOT");
  if (!root_env) return {Outcome::Skip, "set UXTD_ROOT to a directory containing 14M/, 04M/, 03F/"};
  const fs::path root = root_env;
  struct Expected {
    const char* speaker;
    double mse_mean;
    int boundary_near;  // -1 when no boundary is asserted
  };
  const Expected expected[] = {{"14M", 178, -1}, {"04M", 368, 33}, {"03F", 351, 30}};
  std::ostringstream detail;
  bool ok = true;
  double means[3] = {0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    const fs::path dir = root / expected[k].speaker;
    if (!fs::is_directory(dir)) return {Outcome::Skip, "missing " + dir.string()};
    AnalysisConfig cfg;
    cfg.metrics = {Metric::Mse};
    cfg.emit.heatmaps = true;
    cfg.out_dir = scratch_dir(std::string("uxtd_") + expected[k].speaker);
    SessionReport r;
    try {
      r = analyze_session(load_ultrasuite_session(dir), cfg);
    } catch (const std::exception& e) {
      return {Outcome::Fail, std::string(expected[k].speaker) + ": " + e.what()};
    }
    const MetricResult& res = r.metrics.front();
    means[k] = res.stats->mean;
    const bool within = std::abs(means[k] - expected[k].mse_mean) <= 0.2 * expected[k].mse_mean;
    bool boundary = true;
    if (expected[k].boundary_near >= 0 && res.change_points) {
      const auto& b = res.change_points->boundaries;
      boundary = std::any_of(b.begin(), b.end(), [&](int x) { return std::abs(x - expected[k].boundary_near) <= 3; });
    }
    ok = ok && within && boundary;
    detail << expected[k].speaker << " MSE " << format_stats(Metric::Mse, *res.stats) << (within ? "" : " [off]")
           << (boundary ? "" : " [no boundary]") << "; ";
  }
  const bool order = means[0] < means[1] && means[0] < means[2];
  detail << (order ? "ordering holds" : "ordering violated");
  return {ok && order ? Outcome::Pass : Outcome::Fail, detail.str()};
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"probedrift"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict determinism() {
  const auto dir = scratch_dir("determinism");
  write_file(dir / "spec.json", R"({"n_utterances": 8, "frames_per_utterance": 3, "width": 48, "height": 32,
                                    "noise_sigma": 2, "shift_boundaries": [{"index": 4, "dx": 2}]})");
  for (const char* run : {"a", "b"}) {
    const int status = run_cli({"analyze", "--spec", (dir / "spec.json").string(), "--out", (dir / run).string(),
                                "--emit", "heatmaps,wedges,report,stats"});
    if (status != 0) return {Outcome::Fail, fmt("analyze exited with %d", status)};
  }
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path twin = dir / "b" / fs::relative(entry.path(), dir / "a");
    if (!fs::is_regular_file(twin) || read_bytes(entry.path()) != read_bytes(twin)) ++differing;
  }
  return {files > 0 && differing == 0 ? Outcome::Pass : Outcome::Fail,
          fmt("%d files compared, %d differ", files, differing)};
}

Verdict performance() {
  SyntheticSpec spec;
  spec.n_utterances = 100;
  spec.frames_per_utterance = 4;
  spec.width = 412;
  spec.height = 63;
  spec.noise_sigma = 2;
  spec.shift_boundaries = {{50, 0, 2}};
  const Session s = generate_synthetic_session(spec);
  const auto t0 = Clock::now();
  AnalysisConfig cfg;
  const SessionReport r = analyze_session(s, cfg);
  const double t = seconds_since(t0);
  return {t < 300 && r.metrics.size() == 3 ? Outcome::Pass : Outcome::Fail,
          fmt("%.1f s on %d worker(s)", t, resolve_jobs(0))};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"metric identities", metric_identities},
      {"oracle equivalence", oracle_equivalence},
      {"analytic SSIM", analytic_ssim},
      {"translation robustness", translation_robustness},
      {"synthetic misalignment detection", synthetic_detection},
      {"matrix invariants", matrix_invariants},
      {"dataset reproduction", dataset_reproduction},
      {"determinism", determinism},
      {"performance", performance},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Skip ? "SKIP" : "FAIL";
    std::cout << tag << ' ' << index << ' ' << name << ": " << v.detail << std::endl;
    failed += v.outcome == Outcome::Fail;
  }
  return failed == 0 ? 0 : 1;
}

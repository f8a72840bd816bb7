#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "probedrift/report.hpp"
#include "scratch.hpp"

using namespace probedrift;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "probedrift");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path write_spec(const fs::path& dir, const std::string& json) {
  write_file(dir / "spec.json", json);
  return dir / "spec.json";
}

const char* kSpec = R"({"n_utterances": 6, "frames_per_utterance": 2, "width": 32, "height": 32,
                        "noise_sigma": 1, "shift_boundaries": [{"index": 3, "dx": 2}]})";

}  // namespace

TEST_CASE("analyze a synthetic spec") {
  const auto dir = scratch_dir("cli_analyze");
  const auto spec = write_spec(dir, kSpec);
  const auto r = run_cli({"analyze", "--spec", spec.string(), "--out", (dir / "out").string(), "--jobs", "2"});
  CHECK(r.status == 0);
  CHECK(r.err.empty());
  CHECK(r.out.rfind("MSE ", 0) == 0);
  CHECK(r.out.find("\nSSIM 0.") != std::string::npos);
  CHECK(r.out.find("\nCW-SSIM 0.") != std::string::npos);
  CHECK(fs::is_regular_file(dir / "out" / "report.json"));
  CHECK(fs::is_regular_file(dir / "out" / "heatmap_CW-SSIM.png"));
  CHECK(fs::is_regular_file(dir / "out" / "stats.txt"));
  CHECK_FALSE(fs::exists(dir / "out" / "wedges"));
  const SessionReport rep = read_report(dir / "out" / "report.json");
  REQUIRE(rep.find(Metric::Mse) != nullptr);
  CHECK(rep.find(Metric::Mse)->matrix.n() == 6);
}

TEST_CASE("synth then analyze the manifest") {
  const auto dir = scratch_dir("cli_synth");
  const auto spec = write_spec(dir, kSpec);
  const auto s = run_cli({"synth", "--spec", spec.string(), "--out", (dir / "session").string(), "--seed", "9"});
  REQUIRE(s.status == 0);
  CHECK(fs::is_regular_file(dir / "session" / "manifest.json"));
  const auto a = run_cli({"analyze", "--manifest", (dir / "session" / "manifest.json").string(), "--metrics",
                          "mse,ssim", "--emit", "report,wedges", "--out", (dir / "out").string()});
  CHECK(a.status == 0);
  CHECK(a.out.find("CW-SSIM") == std::string::npos);
  CHECK(fs::is_regular_file(dir / "out" / "wedges" / "u000.png"));
  CHECK_FALSE(fs::exists(dir / "out" / "heatmap_MSE.png"));
  CHECK(read_report(dir / "out" / "report.json").speaker_id == "synthetic");
}

TEST_CASE("config file values yield to flags") {
  const auto dir = scratch_dir("cli_config");
  const auto spec = write_spec(dir, kSpec);
  write_file(dir / "cfg.json", R"({"metrics": ["cwssim"], "emit": "report", "cwssim": {"k_stabilizer": 0.05},
                                   "spec": ")" + spec.generic_string() + R"("})");
  const auto r = run_cli({"analyze", "--config", (dir / "cfg.json").string(), "--cwssim-k", "0.02", "--out",
                          (dir / "out").string()});
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("CW-SSIM ", 0) == 0);
  const SessionReport rep = read_report(dir / "out" / "report.json");
  CHECK(rep.settings.cwssim.k_stabilizer == 0.02);
  CHECK(rep.metrics.size() == 1);
}

TEST_CASE("ingest failures exit with 1") {
  const auto dir = scratch_dir("cli_ingest");
  auto r = run_cli({"analyze", "--input", (dir / "does_not_exist").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("input directory not found") != std::string::npos);
  r = run_cli({"analyze", "--input", dir.string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("no utterances found") != std::string::npos);
  r = run_cli({"analyze"});
  CHECK(r.status == 1);
  r = run_cli({"analyze", "--spec", write_spec(dir, R"({"width": -3})").string()});
  CHECK(r.status == 1);
  CHECK(r.err.find("width") != std::string::npos);
  r = run_cli({"analyze", "--spec", (dir / "spec.json").string(), "--metrics", "psnr"});
  CHECK(r.status == 1);
}

TEST_CASE("analysis failures exit with 2") {
  const auto dir = scratch_dir("cli_analysis");
  const auto spec = write_spec(dir, R"({"n_utterances": 3, "width": 8, "height": 8})");
  const auto r = run_cli({"analyze", "--spec", spec.string(), "--metrics", "ssim", "--out", (dir / "out").string()});
  CHECK(r.status == 2);
  CHECK(r.err.find("SSIM") != std::string::npos);
}

TEST_CASE("emit failures exit with 3") {
  const auto dir = scratch_dir("cli_emit");
  const auto spec = write_spec(dir, kSpec);
  write_file(dir / "blocker", "x");
  const auto r = run_cli({"analyze", "--spec", spec.string(), "--out", (dir / "blocker" / "out").string()});
  CHECK(r.status == 3);
}

TEST_CASE("batch over speaker directories") {
  const auto dir = scratch_dir("cli_batch");
  const auto spec = write_spec(dir, kSpec);
  REQUIRE(run_cli({"synth", "--spec", spec.string(), "--out", (dir / "root" / "spk1").string()}).status == 0);
  REQUIRE(run_cli({"synth", "--spec", spec.string(), "--out", (dir / "root" / "spk2").string(), "--seed", "4"})
              .status == 0);

  auto r = run_cli({"batch", (dir / "root").string(), "--out", (dir / "out").string(), "--metrics", "mse,cwssim"});
  CHECK(r.status == 0);
  CHECK(r.out.rfind("speaker\tMSE mean (std)\tCW-SSIM mean (std)\n", 0) == 0);
  CHECK(r.out.find("\nspk1\t") != std::string::npos);
  CHECK(r.out.find("\nspk2\t") != std::string::npos);
  CHECK(fs::is_regular_file(dir / "out" / "spk2" / "report.json"));
  const std::string table = read_text(dir / "out" / "table.csv");
  CHECK(table.rfind("speaker,MSE_mean,MSE_std,CW-SSIM_mean,CW-SSIM_std\nspk1,", 0) == 0);

  fs::create_directories(dir / "root" / "broken");
  r = run_cli({"batch", (dir / "root").string(), "--out", (dir / "out2").string()});
  CHECK(r.status == 4);
  CHECK(r.err.find("broken") != std::string::npos);
  CHECK(r.out.find("\nspk1\t") != std::string::npos);

  CHECK(run_cli({"batch", (dir / "nowhere").string()}).status == 1);
}

TEST_CASE("unknown subcommands and flags are usage errors") {
  CHECK(run_cli({}).status != 0);
  CHECK(run_cli({"frobnicate"}).status != 0);
  CHECK(run_cli({"analyze", "--bogus"}).status != 0);
  CHECK(run_cli({"analyze", "--help"}).status == 0);
}

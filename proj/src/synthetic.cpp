#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "probedrift/session.hpp"

using nlohmann::json;

namespace probedrift {

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (n_utterances < 1) fail("n_utterances", "must be >= 1");
  if (frames_per_utterance < 1) fail("frames_per_utterance", "must be >= 1");
  if (width < 1) fail("width", "must be >= 1");
  if (height < 1) fail("height", "must be >= 1");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma", "must be >= 0");
  const double limit = std::min(width, height) / 2.0;
  for (std::size_t i = 0; i < shift_boundaries.size(); ++i) {
    const ShiftBoundary& b = shift_boundaries[i];
    const std::string field = "shift_boundaries[" + std::to_string(i) + "]";
    if (b.index < 1 || b.index > n_utterances - 1)
      fail(field + ".index", "must lie in [1, " + std::to_string(n_utterances - 1) + "]");
    if (std::abs(b.dy) >= limit) fail(field + ".dy", "|shift| must be < min(width, height)/2");
    if (std::abs(b.dx) >= limit) fail(field + ".dx", "|shift| must be < min(width, height)/2");
  }
}

Grid<double> circular_shift(const Grid<double>& g, int dy, int dx) {
  const Eigen::Index rows = g.rows(), cols = g.cols();
  Grid<double> out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index src_r = ((r - dy) % rows + rows) % rows;
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = g(src_r, ((c - dx) % cols + cols) % cols);
  }
  return out;
}

Grid<double> band_limited_texture(int width, int height, std::uint64_t seed, double blur_sigma, double low,
                                  double high) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Grid<double> noise(height, width);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = uniform(rng);

  // Periodic Gaussian low-pass, separable.
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * blur_sigma)));
  std::vector<double> taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) taps[k + radius] = std::exp(-0.5 * k * k / (blur_sigma * blur_sigma));
  double norm = 0;
  for (double t : taps) norm += t;
  for (double& t : taps) t /= norm;

  auto wrap = [](Eigen::Index i, Eigen::Index n) { return ((i % n) + n) % n; };
  Grid<double> horiz(height, width);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * noise(r, wrap(c + k, width));
      horiz(r, c) = acc;
    }
  Grid<double> tex(height, width);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c) {
      double acc = 0;
      for (int k = -radius; k <= radius; ++k) acc += taps[k + radius] * horiz(wrap(r + k, height), c);
      tex(r, c) = acc;
    }

  const double lo = tex.minCoeff(), hi = tex.maxCoeff();
  if (hi - lo <= 0) return Grid<double>::Constant(height, width, 0.5 * (low + high));
  return low + (tex - lo) * ((high - low) / (hi - lo));
}

Session generate_synthetic_session(const SyntheticSpec& spec) {
  spec.validate();
  const Grid<double> base = band_limited_texture(spec.width, spec.height, spec.texture_seed);

  std::vector<ShiftBoundary> boundaries = spec.shift_boundaries;
  std::stable_sort(boundaries.begin(), boundaries.end(),
                   [](const ShiftBoundary& a, const ShiftBoundary& b) { return a.index < b.index; });

  // Noise stream is independent of the texture stream but fixed by the seed.
  std::mt19937_64 rng(spec.texture_seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Session s;
  s.speaker_id = "synthetic";
  s.session_id = "seed-" + std::to_string(spec.texture_seed);
  std::map<std::pair<int, int>, Grid<double>> shifted;
  int dy = 0, dx = 0;
  std::size_t next = 0;
  for (int i = 0; i < spec.n_utterances; ++i) {
    while (next < boundaries.size() && boundaries[next].index <= i) {
      dy += boundaries[next].dy;
      dx += boundaries[next].dx;
      ++next;
    }
    auto it = shifted.find({dy, dx});
    if (it == shifted.end()) it = shifted.emplace(std::pair{dy, dx}, circular_shift(base, dy, dx)).first;
    const Grid<double>& img = it->second;

    char id[32];
    std::snprintf(id, sizeof id, "u%03d", i);
    Utterance u;
    u.id = id;
    u.timestamp = static_cast<double>(i);
    u.frames.reserve(static_cast<std::size_t>(spec.frames_per_utterance));
    for (int f = 0; f < spec.frames_per_utterance; ++f) {
      std::vector<std::uint8_t> px(static_cast<std::size_t>(img.size()));
      for (Eigen::Index k = 0; k < img.size(); ++k) {
        double v = img.data()[k];
        if (spec.noise_sigma > 0) v += spec.noise_sigma * gauss(rng);
        px[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
      }
      u.frames.emplace_back(spec.width, spec.height, std::move(px));
    }
    s.utterances.push_back(std::move(u));
  }
  return s;
}

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("spec: top level must be an object");
  SyntheticSpec spec;
  auto int_field = [&](const char* key, int& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer()) throw std::invalid_argument(std::string(key) + ": must be an integer");
    dst = doc[key].get<int>();
  };
  int_field("n_utterances", spec.n_utterances);
  int_field("frames_per_utterance", spec.frames_per_utterance);
  int_field("width", spec.width);
  int_field("height", spec.height);
  if (doc.contains("noise_sigma")) {
    if (!doc["noise_sigma"].is_number()) throw std::invalid_argument("noise_sigma: must be a number");
    spec.noise_sigma = doc["noise_sigma"].get<double>();
  }
  if (doc.contains("texture_seed")) {
    if (!doc["texture_seed"].is_number_unsigned()) throw std::invalid_argument("texture_seed: must be a non-negative integer");
    spec.texture_seed = doc["texture_seed"].get<std::uint64_t>();
  }
  if (doc.contains("shift_boundaries")) {
    const json& arr = doc["shift_boundaries"];
    if (!arr.is_array()) throw std::invalid_argument("shift_boundaries: must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string field = "shift_boundaries[" + std::to_string(i) + "]";
      const json& b = arr[i];
      if (!b.is_object()) throw std::invalid_argument(field + ": must be an object");
      ShiftBoundary sb;
      for (auto [key, dst] : {std::pair{"index", &sb.index}, std::pair{"dy", &sb.dy}, std::pair{"dx", &sb.dx}}) {
        if (!b.contains(key)) {
          if (std::string(key) == "index") throw std::invalid_argument(field + ".index: required");
          continue;
        }
        if (!b[key].is_number_integer()) throw std::invalid_argument(field + "." + key + ": must be an integer");
        *dst = b[key].get<int>();
      }
      spec.shift_boundaries.push_back(sb);
    }
  }
  spec.validate();
  return spec;
}

std::string synthetic_spec_to_json(const SyntheticSpec& spec) {
  json doc = {{"n_utterances", spec.n_utterances}, {"frames_per_utterance", spec.frames_per_utterance},
              {"width", spec.width},               {"height", spec.height},
              {"noise_sigma", spec.noise_sigma},   {"texture_seed", spec.texture_seed}};
  doc["shift_boundaries"] = json::array();
  for (const auto& b : spec.shift_boundaries)
    doc["shift_boundaries"].push_back({{"index", b.index}, {"dy", b.dy}, {"dx", b.dx}});
  return doc.dump(2);
}

}  // namespace probedrift

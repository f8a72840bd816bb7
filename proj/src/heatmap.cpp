#include <algorithm>
#include <cmath>
#include <limits>

#include "probedrift/errors.hpp"
#include "probedrift/render.hpp"

namespace probedrift {

namespace {

// Nine evenly spaced samples of the viridis map.
constexpr Rgb kViridis[] = {{68, 1, 84},    {72, 40, 120},  {62, 73, 137},  {49, 104, 142}, {33, 145, 140},
                            {53, 183, 121}, {94, 201, 98},  {173, 220, 48}, {253, 231, 37}};

constexpr Rgb kTick = {0, 0, 0};
constexpr Rgb kBackground = {255, 255, 255};

}  // namespace

Rgb palette_color(Palette p, double t) {
  t = std::clamp(std::isnan(t) ? 0.0 : t, 0.0, 1.0);
  if (p == Palette::Grayscale) {
    const auto v = static_cast<std::uint8_t>(std::lround(255.0 * t));
    return {v, v, v};
  }
  constexpr int last = static_cast<int>(std::size(kViridis)) - 1;
  const double pos = t * last;
  const int i = std::min(static_cast<int>(pos), last - 1);
  const double f = pos - i;
  Rgb c;
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<std::uint8_t>(std::lround(kViridis[i][k] + f * (kViridis[i + 1][k] - kViridis[i][k])));
  return c;
}

void HeatmapSpec::validate() const {
  if (value_range && !(value_range->first < value_range->second))
    throw std::invalid_argument("heatmap value_range requires min < max");
  if (cell_size < 1) throw std::invalid_argument("heatmap cell_size must be >= 1");
  if (tick_every < 0 || tick_length < 0) throw std::invalid_argument("heatmap ticks must be non-negative");
}

HeatmapSpec default_heatmap_spec(Metric m) {
  HeatmapSpec spec;
  spec.colormap = m == Metric::CwSsim ? Palette::Grayscale : Palette::Viridis;
  spec.nan_color = m == Metric::CwSsim ? Rgb{200, 40, 40} : Rgb{255, 255, 255};
  return spec;
}

int heatmap_margin(const HeatmapSpec& spec) { return spec.tick_every > 0 ? spec.tick_length + 2 : 0; }

RgbImage heatmap_pixels(const SimilarityMatrix& m, const HeatmapSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(m.n());
  if (n < 1) throw std::invalid_argument("heatmap of an empty matrix");
  double lo, hi;
  if (spec.value_range) {
    std::tie(lo, hi) = *spec.value_range;
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (Eigen::Index i = 0; i < m.values.size(); ++i) {
      const double v = m.values.data()[i];
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  auto normalise = [&](double v) { return hi > lo ? (v - lo) / (hi - lo) : 0.5; };

  const int margin = heatmap_margin(spec);
  const int side = margin + n * spec.cell_size;
  RgbImage img(side, side, kBackground);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m.values(i, j);
      const Rgb c = std::isfinite(v) ? palette_color(spec.colormap, normalise(v)) : spec.nan_color;
      for (int y = 0; y < spec.cell_size; ++y)
        for (int x = 0; x < spec.cell_size; ++x) img.set(margin + j * spec.cell_size + x, margin + i * spec.cell_size + y, c);
    }
  }
  if (spec.tick_every > 0) {
    for (int i = 0; i < n; i += spec.tick_every) {
      const int at = margin + i * spec.cell_size;
      for (int k = 0; k < spec.tick_length; ++k) {
        img.set(at, margin - 2 - k, kTick);  // top axis
        img.set(margin - 2 - k, at, kTick);  // left axis
      }
    }
  }
  return img;
}

std::filesystem::path render_heatmap(const SimilarityMatrix& m, const HeatmapSpec& spec,
                                     const std::filesystem::path& out) {
  write_png(heatmap_pixels(m, spec), out);
  return out;
}

}  // namespace probedrift

#include <algorithm>
#include <cmath>

#include "probedrift/render.hpp"

namespace probedrift {

void WedgeSpec::validate() const {
  if (!(angle_span > 0.0) || angle_span > 3.14159265358979323846 + 1e-12)
    throw std::invalid_argument("wedge angle_span must lie in (0, pi]");
  if (!(zero_offset >= 0.0)) throw std::invalid_argument("wedge zero_offset must be >= 0");
  if (output_size < 2) throw std::invalid_argument("wedge output_size must be >= 2");
}

WedgeGeometry WedgeGeometry::fit(const WedgeSpec& spec, Eigen::Index /*beams*/, Eigen::Index samples) {
  const double half = spec.angle_span / 2.0;
  const double r_max = spec.zero_offset + double(samples - 1);
  const double y_min = spec.zero_offset * std::cos(half);
  const double extent_x = 2.0 * r_max * std::sin(half);
  const double extent_y = r_max - y_min;
  const double span = std::max({extent_x, extent_y, 1e-9});
  const double usable = double(spec.output_size - 1);
  WedgeGeometry g;
  g.scale = usable / span;
  g.origin_x = usable / 2.0;
  g.origin_y = (usable - extent_y * g.scale) / 2.0 - y_min * g.scale;
  return g;
}

Grid<double> wedge_pixels(const MeanImaged& img, const WedgeSpec& spec) {
  spec.validate();
  const Eigen::Index beams = img.height(), samples = img.width();
  const auto& src = img.pixels();
  const WedgeGeometry geo = WedgeGeometry::fit(spec, beams, samples);
  const double half = spec.angle_span / 2.0;

  Grid<double> out = Grid<double>::Zero(spec.output_size, spec.output_size);
  for (int py = 0; py < spec.output_size; ++py) {
    for (int px = 0; px < spec.output_size; ++px) {
      const double x = (px - geo.origin_x) / geo.scale;
      const double y = (py - geo.origin_y) / geo.scale;
      const double theta = std::atan2(x, y);
      if (theta < -half || theta > half) continue;
      const double sample = std::hypot(x, y) - spec.zero_offset;
      const double beam = beams > 1 ? (theta + half) / spec.angle_span * double(beams - 1) : 0.0;
      if (sample < 0.0 || sample > double(samples - 1)) continue;

      if (spec.interpolation == Interpolation::Nearest) {
        out(py, px) = src(static_cast<Eigen::Index>(std::lround(beam)), static_cast<Eigen::Index>(std::lround(sample)));
        continue;
      }
      const auto b0 = static_cast<Eigen::Index>(std::floor(beam));
      const auto s0 = static_cast<Eigen::Index>(std::floor(sample));
      const Eigen::Index b1 = std::min(b0 + 1, beams - 1), s1 = std::min(s0 + 1, samples - 1);
      const double fb = beam - double(b0), fs = sample - double(s0);
      const double top = (1.0 - fs) * src(b0, s0) + fs * src(b0, s1);
      const double bottom = (1.0 - fs) * src(b1, s0) + fs * src(b1, s1);
      out(py, px) = (1.0 - fb) * top + fb * bottom;
    }
  }
  return out;
}

std::filesystem::path render_wedge(const MeanImaged& img, const WedgeSpec& spec, const std::filesystem::path& out) {
  const Grid<double> px = wedge_pixels(img, spec);
  RgbImage raster(spec.output_size, spec.output_size);
  for (int y = 0; y < spec.output_size; ++y)
    for (int x = 0; x < spec.output_size; ++x) {
      const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(px(y, x), 0.0, 255.0)));
      raster.set(x, y, {v, v, v});
    }
  write_png(raster, out);
  return out;
}

}  // namespace probedrift

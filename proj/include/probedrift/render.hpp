#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "probedrift/image.hpp"
#include "probedrift/similarity.hpp"

namespace probedrift {

using Rgb = std::array<std::uint8_t, 3>;

/// Packed 8-bit RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Writes an 8-bit RGB PNG with no ancillary chunks. Throws EmitError.
void write_png(const RgbImage& img, const std::filesystem::path& out);
RgbImage read_png(const std::filesystem::path& in);

enum class Palette { Viridis, Grayscale };

/// Maps t in [0, 1] onto the palette (clamped).
Rgb palette_color(Palette p, double t);

struct HeatmapSpec {
  Palette colormap = Palette::Viridis;
  std::optional<std::pair<double, double>> value_range;  // auto from finite entries when empty
  Rgb nan_color = {255, 255, 255};
  int cell_size = 4;
  int tick_every = 10;  // utterances between axis ticks; 0 disables the margin
  int tick_length = 4;

  void validate() const;
};

/// Default palette per metric: viridis for MSE and SSIM, grayscale for CW-SSIM.
HeatmapSpec default_heatmap_spec(Metric m);

/// Heatmap raster: an n*cell_size square of cells, offset by a tick margin on
/// the top and left edges when ticks are enabled.
RgbImage heatmap_pixels(const SimilarityMatrix& m, const HeatmapSpec& spec);
int heatmap_margin(const HeatmapSpec& spec);

std::filesystem::path render_heatmap(const SimilarityMatrix& m, const HeatmapSpec& spec,
                                     const std::filesystem::path& out);

enum class Interpolation { Nearest, Bilinear };

struct WedgeSpec {
  double angle_span = 92.0 * 3.14159265358979323846 / 180.0;  // radians
  double zero_offset = 10.0;                                    // samples from apex to first sample
  int output_size = 256;
  Interpolation interpolation = Interpolation::Bilinear;

  void validate() const;
};

/// Fan geometry shared by the renderer and its tests: maps output pixels to
/// (beam angle, radius) in source units.
struct WedgeGeometry {
  double scale = 1.0;    // output pixels per source sample
  double origin_x = 0;   // apex position in output pixels
  double origin_y = 0;

  static WedgeGeometry fit(const WedgeSpec& spec, Eigen::Index beams, Eigen::Index samples);
};

/// Scan-converted image: rows of the source are beams spread evenly across
/// angle_span (row 0 at -span/2, measured from straight down, positive toward
/// +x), columns are radial samples starting at zero_offset. Pixels outside
/// the fan are 0.
Grid<double> wedge_pixels(const MeanImaged& img, const WedgeSpec& spec);

std::filesystem::path render_wedge(const MeanImaged& img, const WedgeSpec& spec, const std::filesystem::path& out);

}  // namespace probedrift

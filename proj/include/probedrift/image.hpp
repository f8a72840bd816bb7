#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace probedrift {

/// Row-major real grid; rows are scanline vectors, columns are samples along
/// a vector.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using ComplexGrid =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// One raw 8-bit scanline frame. `height` is the vector count, `width` the
/// number of pixels per vector; pixels are stored vector-major.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Frame() = default;
  Frame(int w, int h, std::vector<std::uint8_t> px) : width(w), height(h), pixels(std::move(px)) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("frame dimensions must be positive");
    }
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("frame pixel count " + std::to_string(pixels.size()) +
                                  " does not match " + std::to_string(height) + "x" +
                                  std::to_string(width));
    }
  }

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Temporal average of an utterance. Pixels are finite and lie in [0, 255].
template <typename Scalar>
class MeanImage {
 public:
  using Scalar_t = Scalar;

  explicit MeanImage(Grid<Scalar> pixels) : pixels_(std::move(pixels)) {
    if (pixels_.rows() < 1 || pixels_.cols() < 1) {
      throw std::invalid_argument("mean image must be non-empty");
    }
    for (Eigen::Index i = 0; i < pixels_.size(); ++i) {
      const Scalar v = pixels_.data()[i];
      if (!std::isfinite(v) || v < Scalar(0) || v > Scalar(255)) {
        throw std::invalid_argument("mean image pixel outside [0, 255] or non-finite");
      }
    }
  }

  Eigen::Index width() const { return pixels_.cols(); }
  Eigen::Index height() const { return pixels_.rows(); }
  const Grid<Scalar>& pixels() const { return pixels_; }

  friend bool operator==(const MeanImage& a, const MeanImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

 private:
  Grid<Scalar> pixels_;
};

using MeanImaged = MeanImage<double>;

template <typename Scalar>
MeanImage<Scalar> to_mean_image(const Frame& f) {
  Grid<Scalar> g(f.height, f.width);
  for (int r = 0; r < f.height; ++r)
    for (int c = 0; c < f.width; ++c) g(r, c) = Scalar(f.at(r, c));
  return MeanImage<Scalar>(std::move(g));
}

template <typename A, typename B>
void require_same_dims(const MeanImage<A>& a, const MeanImage<B>& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("image dimensions differ: " + std::to_string(a.height()) + "x" +
                                std::to_string(a.width()) + " vs " + std::to_string(b.height()) +
                                "x" + std::to_string(b.width()));
  }
}

}  // namespace probedrift

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "probedrift/image.hpp"

namespace probedrift {

/// Mean squared pixel difference on the [0, 255] scale.
template <typename Scalar>
Scalar mse(const MeanImage<Scalar>& a, const MeanImage<Scalar>& b) {
  require_same_dims(a, b);
  // (a-b)^2 == (b-a)^2 bit for bit, so the result is symmetric.
  return (a.pixels() - b.pixels()).square().sum() / Scalar(a.pixels().size());
}

template <typename Scalar>
struct SsimParams {
  int window_size = 11;
  Scalar gaussian_sigma = Scalar(1.5);
  Scalar alpha = Scalar(1);
  Scalar beta = Scalar(1);
  Scalar gamma = Scalar(1);
  Scalar k1 = Scalar(0.01);
  Scalar k2 = Scalar(0.03);
  Scalar dynamic_range = Scalar(255);

  Scalar c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  Scalar c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  Scalar c3() const { return c2() / Scalar(2); }

  bool unit_exponents() const { return alpha == Scalar(1) && beta == Scalar(1) && gamma == Scalar(1); }

  void validate() const {
    if (window_size < 3 || window_size % 2 == 0)
      throw std::invalid_argument("ssim window_size must be odd and >= 3");
    if (!(gaussian_sigma > 0)) throw std::invalid_argument("ssim gaussian_sigma must be > 0");
    if (!(k1 > 0) || !(k2 > 0)) throw std::invalid_argument("ssim k1, k2 must be > 0");
    if (!(alpha >= 0) || !(beta >= 0) || !(gamma >= 0))
      throw std::invalid_argument("ssim exponents must be >= 0");
    if (!(dynamic_range > 0)) throw std::invalid_argument("ssim dynamic_range must be > 0");
  }

  void validate_for(Eigen::Index width, Eigen::Index height) const {
    validate();
    if (window_size > width || window_size > height)
      throw std::invalid_argument("ssim window " + std::to_string(window_size) +
                                  " larger than image " + std::to_string(height) + "x" +
                                  std::to_string(width));
  }

  friend bool operator==(const SsimParams&, const SsimParams&) = default;
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gaussian_taps(int size, Scalar sigma) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> g(size);
  const Scalar centre = Scalar(size - 1) / Scalar(2);
  for (int i = 0; i < size; ++i) {
    const Scalar d = Scalar(i) - centre;
    g(i) = std::exp(-(d * d) / (Scalar(2) * sigma * sigma));
  }
  return g / g.sum();
}

template <typename Scalar>
Grid<Scalar> gaussian_window(int size, Scalar sigma) {
  const auto g = gaussian_taps(size, sigma);
  return (g.matrix() * g.matrix().transpose()).array();
}

/// Separable correlation with `taps`, keeping only positions where the whole
/// window lies inside the grid.
template <typename Scalar>
Grid<Scalar> filter_valid(const Grid<Scalar>& x, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& taps) {
  const Eigen::Index k = taps.size();
  const Eigen::Index out_rows = x.rows() - k + 1;
  const Eigen::Index out_cols = x.cols() - k + 1;
  Grid<Scalar> horiz(x.rows(), out_cols);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      Scalar acc(0);
      for (Eigen::Index j = 0; j < k; ++j) acc += taps(j) * x(r, c + j);
      horiz(r, c) = acc;
    }
  }
  Grid<Scalar> out(out_rows, out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r) {
    for (Eigen::Index c = 0; c < out_cols; ++c) {
      Scalar acc(0);
      for (Eigen::Index j = 0; j < k; ++j) acc += taps(j) * horiz(r + j, c);
      out(r, c) = acc;
    }
  }
  return out;
}

/// Per-image windowed moments, reusable across every pair an image takes
/// part in.
template <typename Scalar>
struct SsimMoments {
  Grid<Scalar> pixels;
  Grid<Scalar> mean;     // E[x]
  Grid<Scalar> second;   // E[x^2]
  Eigen::Array<Scalar, Eigen::Dynamic, 1> taps;
};

template <typename Scalar>
SsimMoments<Scalar> ssim_moments(const MeanImage<Scalar>& img, const SsimParams<Scalar>& p) {
  p.validate_for(img.width(), img.height());
  SsimMoments<Scalar> m;
  m.pixels = img.pixels();
  m.taps = gaussian_taps(p.window_size, p.gaussian_sigma);
  m.mean = filter_valid<Scalar>(m.pixels, m.taps);
  m.second = filter_valid<Scalar>(m.pixels.square(), m.taps);
  return m;
}

namespace detail {

template <typename Scalar>
Scalar signed_pow(Scalar v, Scalar e) {
  if (e == Scalar(1)) return v;
  return v < Scalar(0) ? -std::pow(-v, e) : std::pow(v, e);
}

}  // namespace detail

/// Mean local SSIM from precomputed moments. Every term is built from
/// commutative products so swapping the operands is bit-exact.
template <typename Scalar>
Scalar ssim(const SsimMoments<Scalar>& a, const SsimMoments<Scalar>& b, const SsimParams<Scalar>& p) {
  if (a.pixels.rows() != b.pixels.rows() || a.pixels.cols() != b.pixels.cols())
    throw std::invalid_argument("ssim: image dimensions differ");
  const Grid<Scalar> cross = filter_valid<Scalar>(a.pixels * b.pixels, a.taps);
  const Scalar c1 = p.c1(), c2 = p.c2(), c3 = p.c3();

  const auto& mu_a = a.mean;
  const auto& mu_b = b.mean;
  const Grid<Scalar> var_a = a.second - mu_a.square();
  const Grid<Scalar> var_b = b.second - mu_b.square();
  const Grid<Scalar> cov = cross - mu_a * mu_b;

  Scalar total(0);
  if (p.unit_exponents()) {
    const Grid<Scalar> local = ((Scalar(2) * mu_a * mu_b + c1) * (Scalar(2) * cov + c2)) /
                               ((mu_a.square() + mu_b.square() + c1) * (var_a + var_b + c2));
    total = local.sum();
  } else {
    for (Eigen::Index i = 0; i < cov.size(); ++i) {
      const Scalar ma = mu_a.data()[i], mb = mu_b.data()[i];
      const Scalar va = std::max(var_a.data()[i], Scalar(0));
      const Scalar vb = std::max(var_b.data()[i], Scalar(0));
      const Scalar sa = std::sqrt(va), sb = std::sqrt(vb);
      const Scalar lum = (Scalar(2) * ma * mb + c1) / (ma * ma + mb * mb + c1);
      const Scalar con = (Scalar(2) * sa * sb + c2) / (va + vb + c2);
      const Scalar str = (cov.data()[i] + c3) / (sa * sb + c3);
      total += detail::signed_pow(lum, p.alpha) * detail::signed_pow(con, p.beta) *
               detail::signed_pow(str, p.gamma);
    }
  }
  return total / Scalar(cov.size());
}

/// Gaussian-windowed SSIM averaged over every window fully inside the image.
template <typename Scalar>
Scalar ssim(const MeanImage<Scalar>& a, const MeanImage<Scalar>& b,
            const SsimParams<Scalar>& p = SsimParams<Scalar>{}) {
  require_same_dims(a, b);
  return ssim(ssim_moments(a, p), ssim_moments(b, p), p);
}

}  // namespace probedrift

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "probedrift/image.hpp"

namespace probedrift {

template <typename Scalar>
struct CwSsimParams {
  Scalar k_stabilizer = Scalar(0.01);
  int n_scales = 4;
  int n_orientations = 6;
  int comparison_level = 2;
  int local_window = 7;

  void validate() const {
    if (!(k_stabilizer > 0)) throw std::invalid_argument("cwssim k_stabilizer must be > 0");
    if (n_scales < 1) throw std::invalid_argument("cwssim n_scales must be >= 1");
    if (n_orientations < 1) throw std::invalid_argument("cwssim n_orientations must be >= 1");
    if (comparison_level < 1 || comparison_level > n_scales)
      throw std::invalid_argument("cwssim comparison_level must lie in [1, n_scales]");
    if (local_window < 1 || local_window % 2 == 0)
      throw std::invalid_argument("cwssim local_window must be odd");
  }

  friend bool operator==(const CwSsimParams&, const CwSsimParams&) = default;
};

/// Grid size at pyramid scale `scale` (1-based): each axis decimated by
/// 2^(scale-1), rounding up.
inline Eigen::Index scale_extent(Eigen::Index full, int scale) {
  const Eigen::Index step = Eigen::Index(1) << (scale - 1);
  return (full + step - 1) / step;
}

template <typename Scalar>
struct SubbandCoefficients {
  int scale = 1;        // 1 = finest
  int orientation = 0;  // 0 .. n_orientations-1, angle = pi * orientation / n_orientations
  ComplexGrid<Scalar> coefficients;
};

namespace steerable {

// Frequencies are normalized so that 1 is the Nyquist rate along an axis.

/// Low-pass transition from 1 (r <= edge/2) to 0 (r >= edge) with a half-cosine
/// in log2(r).
template <typename Scalar>
Scalar lowpass(Scalar r, Scalar edge) {
  if (r <= edge / Scalar(2)) return Scalar(1);
  if (r >= edge) return Scalar(0);
  return std::cos(std::numbers::pi_v<Scalar> / Scalar(2) * std::log2(Scalar(2) * r / edge));
}

/// Complement of `lowpass` in power: lowpass^2 + highpass^2 == 1.
template <typename Scalar>
Scalar highpass(Scalar r, Scalar edge) {
  if (r <= edge / Scalar(2)) return Scalar(0);
  if (r >= edge) return Scalar(1);
  return std::sin(std::numbers::pi_v<Scalar> / Scalar(2) * std::log2(Scalar(2) * r / edge));
}

/// Radial response of band `scale`: the initial low-pass at the Nyquist rate,
/// the low-passes of every finer split, and the high-pass of the split at
/// 2^-scale. Band `scale` vanishes beyond 2^-(scale-1), so decimating it by
/// 2^(scale-1) does not alias.
template <typename Scalar>
Scalar radial(Scalar r, int scale) {
  Scalar v = lowpass(r, Scalar(1));
  for (int s = 1; s < scale; ++s) v *= lowpass(r, std::ldexp(Scalar(1), -s));
  return v * highpass(r, std::ldexp(Scalar(1), -scale));
}

/// Analytic (one-sided) angular response for one of `count` orientations:
/// 2 * alpha * cos(theta - theta_b)^(count-1) on the half-plane facing theta_b.
template <typename Scalar>
Scalar angular(Scalar theta, int orientation, int count) {
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const int order = count - 1;
  // alpha_K = 2^(K-1) (K-1)! / sqrt(K (2(K-1))!)
  const Scalar alpha = std::exp(Scalar(order) * std::log(Scalar(2)) + std::lgamma(Scalar(count)) -
                                Scalar(0.5) * (std::log(Scalar(count)) + std::lgamma(Scalar(2 * order + 1))));
  const Scalar d = std::cos(theta - pi * Scalar(orientation) / Scalar(count));
  if (d <= Scalar(0)) return Scalar(0);
  return Scalar(2) * alpha * std::pow(d, Scalar(order));
}

/// Signed normalized frequency of DFT bin `k` out of `n`.
template <typename Scalar>
Scalar bin_frequency(Eigen::Index k, Eigen::Index n) {
  const Eigen::Index signed_k = (2 * k < n) ? k : k - n;
  return Scalar(2) * Scalar(signed_k) / Scalar(n);
}

/// Full-resolution frequency response of one subband, laid out in DFT order.
template <typename Scalar>
Grid<Scalar> filter_response(Eigen::Index rows, Eigen::Index cols, int scale, int orientation,
                             int n_orientations) {
  Grid<Scalar> h(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Scalar fy = bin_frequency<Scalar>(r, rows);
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Scalar fx = bin_frequency<Scalar>(c, cols);
      const Scalar rad = std::hypot(fx, fy);
      if (rad == Scalar(0)) {
        h(r, c) = Scalar(0);
        continue;
      }
      h(r, c) = radial(rad, scale) * angular(std::atan2(fy, fx), orientation, n_orientations);
    }
  }
  return h;
}

template <typename Scalar>
ComplexGrid<Scalar> fft2(const ComplexGrid<Scalar>& x, bool inverse) {
  Eigen::FFT<Scalar> fft;
  ComplexGrid<Scalar> out(x.rows(), x.cols());
  std::vector<std::complex<Scalar>> in_buf, out_buf;
  in_buf.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) in_buf[c] = x(r, c);
    inverse ? fft.inv(out_buf, in_buf) : fft.fwd(out_buf, in_buf);
    for (Eigen::Index c = 0; c < x.cols(); ++c) out(r, c) = out_buf[c];
  }
  in_buf.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) in_buf[r] = out(r, c);
    inverse ? fft.inv(out_buf, in_buf) : fft.fwd(out_buf, in_buf);
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r, c) = out_buf[r];
  }
  return out;
}

}  // namespace steerable

/// Throws when the image cannot carry `p.n_scales` decimations.
template <typename Scalar>
void require_decomposable(Eigen::Index width, Eigen::Index height, const CwSsimParams<Scalar>& p) {
  p.validate();
  const Eigen::Index need = Eigen::Index(1) << p.n_scales;
  if (width < need || height < need)
    throw std::invalid_argument("image " + std::to_string(height) + "x" + std::to_string(width) +
                                " too small for " + std::to_string(p.n_scales) + " scales (need >= " +
                                std::to_string(need) + " per side)");
}

/// Subbands of a single scale, one per orientation, from a precomputed
/// image spectrum.
template <typename Scalar>
std::vector<SubbandCoefficients<Scalar>> decompose_scale(const ComplexGrid<Scalar>& spectrum, int scale,
                                                         int n_orientations) {
  const Eigen::Index rows = spectrum.rows(), cols = spectrum.cols();
  const Eigen::Index step = Eigen::Index(1) << (scale - 1);
  std::vector<SubbandCoefficients<Scalar>> bands;
  bands.reserve(static_cast<std::size_t>(n_orientations));
  for (int o = 0; o < n_orientations; ++o) {
    const Grid<Scalar> h = steerable::filter_response<Scalar>(rows, cols, scale, o, n_orientations);
    const ComplexGrid<Scalar> response = steerable::fft2<Scalar>(spectrum * h.template cast<std::complex<Scalar>>(), true);
    SubbandCoefficients<Scalar> band;
    band.scale = scale;
    band.orientation = o;
    band.coefficients.resize(scale_extent(rows, scale), scale_extent(cols, scale));
    for (Eigen::Index r = 0; r < band.coefficients.rows(); ++r)
      for (Eigen::Index c = 0; c < band.coefficients.cols(); ++c)
        band.coefficients(r, c) = response(r * step, c * step);
    bands.push_back(std::move(band));
  }
  return bands;
}

template <typename Scalar>
ComplexGrid<Scalar> image_spectrum(const MeanImage<Scalar>& img) {
  return steerable::fft2<Scalar>(img.pixels().template cast<std::complex<Scalar>>(), false);
}

/// Subbands at one scale only; what CW-SSIM needs.
template <typename Scalar>
std::vector<SubbandCoefficients<Scalar>> decompose_level(const MeanImage<Scalar>& img,
                                                         const CwSsimParams<Scalar>& p, int scale) {
  require_decomposable(img.width(), img.height(), p);
  if (scale < 1 || scale > p.n_scales) throw std::invalid_argument("scale outside [1, n_scales]");
  return decompose_scale(image_spectrum(img), scale, p.n_orientations);
}

/// Complex steerable pyramid: n_scales x n_orientations oriented band-pass
/// subbands, ordered scale-major. Built in the frequency domain; linear in
/// the image.
template <typename Scalar>
std::vector<SubbandCoefficients<Scalar>> complex_wavelet_decompose(const MeanImage<Scalar>& img,
                                                                   const CwSsimParams<Scalar>& p = {}) {
  require_decomposable(img.width(), img.height(), p);
  const ComplexGrid<Scalar> spectrum = image_spectrum(img);
  std::vector<SubbandCoefficients<Scalar>> all;
  for (int s = 1; s <= p.n_scales; ++s) {
    auto bands = decompose_scale(spectrum, s, p.n_orientations);
    for (auto& b : bands) all.push_back(std::move(b));
  }
  return all;
}

}  // namespace probedrift

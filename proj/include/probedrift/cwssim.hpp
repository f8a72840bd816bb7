#pragma once

#include <cmath>
#include <vector>

#include "probedrift/wavelet.hpp"

namespace probedrift {

/// Subbands of one image at the comparison level, computed once and reused
/// for every pair the image takes part in.
template <typename Scalar>
struct CwSsimCoefficients {
  std::vector<SubbandCoefficients<Scalar>> bands;
};

template <typename Scalar>
CwSsimCoefficients<Scalar> cw_ssim_coefficients(const MeanImage<Scalar>& img, const CwSsimParams<Scalar>& p) {
  require_decomposable(img.width(), img.height(), p);
  const Eigen::Index rows = scale_extent(img.height(), p.comparison_level);
  const Eigen::Index cols = scale_extent(img.width(), p.comparison_level);
  if (rows < p.local_window || cols < p.local_window)
    throw std::invalid_argument("cwssim local_window " + std::to_string(p.local_window) +
                                " exceeds level-" + std::to_string(p.comparison_level) + " grid " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  return {decompose_level(img, p, p.comparison_level)};
}

namespace detail {

/// Sums over every k x k window fully inside the grid (separable).
template <typename Scalar>
Grid<Scalar> box_sum_valid(const Grid<Scalar>& x, Eigen::Index k) {
  const Eigen::Index out_rows = x.rows() - k + 1, out_cols = x.cols() - k + 1;
  Grid<Scalar> horiz(x.rows(), out_cols);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < out_cols; ++c) horiz(r, c) = x.row(r).segment(c, k).sum();
  Grid<Scalar> out(out_rows, out_cols);
  for (Eigen::Index r = 0; r < out_rows; ++r)
    for (Eigen::Index c = 0; c < out_cols; ++c) out(r, c) = horiz.col(c).segment(r, k).sum();
  return out;
}

}  // namespace detail

/// Averages 2|sum w_a conj(w_b)| + K over sum|w_a|^2 + sum|w_b|^2 + K across
/// every local window of every orientation. The real and imaginary parts of
/// the cross term are formed from commutative products, so swapping the
/// operands flips only the sign of the imaginary sum and the magnitude is
/// bit-identical.
template <typename Scalar>
Scalar cw_ssim(const CwSsimCoefficients<Scalar>& a, const CwSsimCoefficients<Scalar>& b,
               const CwSsimParams<Scalar>& p) {
  if (a.bands.size() != b.bands.size()) throw std::invalid_argument("cwssim: subband count differs");
  const Scalar k = p.k_stabilizer;
  Scalar total(0);
  Eigen::Index count = 0;
  for (std::size_t o = 0; o < a.bands.size(); ++o) {
    const auto& wa = a.bands[o].coefficients;
    const auto& wb = b.bands[o].coefficients;
    if (wa.rows() != wb.rows() || wa.cols() != wb.cols())
      throw std::invalid_argument("cwssim: image dimensions differ");
    const Grid<Scalar> ar = wa.real(), ai = wa.imag(), br = wb.real(), bi = wb.imag();
    const Grid<Scalar> cross_re = detail::box_sum_valid<Scalar>(ar * br + ai * bi, p.local_window);
    const Grid<Scalar> cross_im = detail::box_sum_valid<Scalar>(ai * br - ar * bi, p.local_window);
    const Grid<Scalar> energy_a = detail::box_sum_valid<Scalar>(ar * ar + ai * ai, p.local_window);
    const Grid<Scalar> energy_b = detail::box_sum_valid<Scalar>(br * br + bi * bi, p.local_window);
    for (Eigen::Index i = 0; i < cross_re.size(); ++i) {
      const Scalar num = Scalar(2) * std::hypot(cross_re.data()[i], cross_im.data()[i]) + k;
      const Scalar den = energy_a.data()[i] + energy_b.data()[i] + k;
      total += num / den;
    }
    count += cross_re.size();
  }
  return total / Scalar(count);
}

/// Complex-wavelet SSIM at `p.comparison_level`.
template <typename Scalar>
Scalar cw_ssim(const MeanImage<Scalar>& a, const MeanImage<Scalar>& b,
               const CwSsimParams<Scalar>& p = CwSsimParams<Scalar>{}) {
  require_same_dims(a, b);
  return cw_ssim(cw_ssim_coefficients(a, p), cw_ssim_coefficients(b, p), p);
}

}  // namespace probedrift

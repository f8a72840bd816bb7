#pragma once

// Brute-force reference implementations used only by the tests. They follow
// the textbook definitions directly and share no code with the library's
// numerical paths.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "probedrift/image.hpp"
#include "probedrift/session.hpp"
#include "probedrift/wavelet.hpp"

namespace oracle {

using probedrift::Grid;
using probedrift::MeanImaged;

inline MeanImaged random_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Grid<double> g(height, width);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) g(r, c) = u(rng);
  return MeanImaged(g);
}

inline MeanImaged textured_image(int width, int height, std::uint64_t seed) {
  return MeanImaged(probedrift::band_limited_texture(width, height, seed));
}

inline double mse(const MeanImaged& a, const MeanImaged& b) {
  double sum = 0;
  for (int r = 0; r < a.height(); ++r)
    for (int c = 0; c < a.width(); ++c) {
      const double d = a.pixels()(r, c) - b.pixels()(r, c);
      sum += d * d;
    }
  return sum / double(a.width() * a.height());
}

/// Windowed SSIM straight from the definition: a 2-D Gaussian window
/// normalized over its own support, central moments summed directly.
inline double ssim(const MeanImaged& a, const MeanImaged& b, int window = 11, double sigma = 1.5) {
  const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
  std::vector<double> w(static_cast<std::size_t>(window * window));
  double wsum = 0;
  const int half = window / 2;
  for (int y = 0; y < window; ++y)
    for (int x = 0; x < window; ++x) {
      const double dy = y - half, dx = x - half;
      w[static_cast<std::size_t>(y * window + x)] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
      wsum += w[static_cast<std::size_t>(y * window + x)];
    }
  for (double& v : w) v /= wsum;

  double total = 0;
  int count = 0;
  for (int r0 = 0; r0 + window <= a.height(); ++r0)
    for (int c0 = 0; c0 + window <= a.width(); ++c0) {
      double ma = 0, mb = 0;
      for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
          const double k = w[static_cast<std::size_t>(y * window + x)];
          ma += k * a.pixels()(r0 + y, c0 + x);
          mb += k * b.pixels()(r0 + y, c0 + x);
        }
      double va = 0, vb = 0, cov = 0;
      for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
          const double k = w[static_cast<std::size_t>(y * window + x)];
          const double da = a.pixels()(r0 + y, c0 + x) - ma, db = b.pixels()(r0 + y, c0 + x) - mb;
          va += k * da * da;
          vb += k * db * db;
          cov += k * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

/// Per-window CW-SSIM by direct complex summation over coefficient grids.
inline double cw_ssim(const std::vector<probedrift::SubbandCoefficients<double>>& a,
                      const std::vector<probedrift::SubbandCoefficients<double>>& b, double k, int window) {
  double total = 0;
  long count = 0;
  for (std::size_t o = 0; o < a.size(); ++o) {
    const auto& wa = a[o].coefficients;
    const auto& wb = b[o].coefficients;
    for (Eigen::Index r0 = 0; r0 + window <= wa.rows(); ++r0)
      for (Eigen::Index c0 = 0; c0 + window <= wa.cols(); ++c0) {
        std::complex<double> cross = 0;
        double ea = 0, eb = 0;
        for (int y = 0; y < window; ++y)
          for (int x = 0; x < window; ++x) {
            const auto p = wa(r0 + y, c0 + x), q = wb(r0 + y, c0 + x);
            cross += p * std::conj(q);
            ea += std::norm(p);
            eb += std::norm(q);
          }
        total += (2 * std::abs(cross) + k) / (ea + eb + k);
        ++count;
      }
  }
  return total / double(count);
}

/// Steerable filter response written from the piecewise definition in terms
/// of u = log2(r): each split at edge e passes fully below e/2, blocks at e
/// and in between follows a quarter cosine period.
inline double split_low(double u, double edge_log2) {
  if (u <= edge_log2 - 1) return 1.0;
  if (u >= edge_log2) return 0.0;
  return std::cos(M_PI / 2 * (u - edge_log2 + 1));
}

inline double split_high(double u, double edge_log2) {
  const double lo = split_low(u, edge_log2);
  return std::sqrt(std::max(0.0, 1.0 - lo * lo));
}

inline double filter(double fx, double fy, int scale, int orientation, int count) {
  const double r = std::sqrt(fx * fx + fy * fy);
  if (r == 0) return 0;
  const double u = std::log2(r);
  double radial = split_low(u, 0.0);
  for (int s = 1; s < scale; ++s) radial *= split_low(u, -s);
  radial *= split_high(u, -scale);
  const double theta = std::atan2(fy, fx);
  const double d = std::cos(theta - M_PI * orientation / count);
  if (d <= 0) return 0;
  // 2^(K-1) (K-1)! / sqrt(K (2(K-1))!)
  double fact_k1 = 1, fact_2k2 = 1;
  for (int i = 2; i <= count - 1; ++i) fact_k1 *= i;
  for (int i = 2; i <= 2 * (count - 1); ++i) fact_2k2 *= i;
  const double alpha = std::pow(2.0, count - 1) * fact_k1 / std::sqrt(count * fact_2k2);
  return radial * 2 * alpha * std::pow(d, count - 1);
}

/// Energy of the decimated subband produced by a unit impulse, via Parseval
/// on the frequency response: sum |H|^2 / (N * D^2).
inline double impulse_band_energy(int rows, int cols, int scale, int orientation, int count) {
  double sum = 0;
  for (int r = 0; r < rows; ++r) {
    const double fy = 2.0 * ((2 * r < rows) ? r : r - rows) / rows;
    for (int c = 0; c < cols; ++c) {
      const double fx = 2.0 * ((2 * c < cols) ? c : c - cols) / cols;
      const double h = filter(fx, fy, scale, orientation, count);
      sum += h * h;
    }
  }
  const double d = std::ldexp(1.0, scale - 1);
  return sum / (double(rows) * cols * d * d);
}

inline Grid<double> mean_of_frames(const probedrift::Utterance& u) {
  Grid<double> sum = Grid<double>::Zero(u.height(), u.width());
  for (const auto& f : u.frames)
    for (int r = 0; r < f.height; ++r)
      for (int c = 0; c < f.width; ++c) sum(r, c) += f.pixels[static_cast<std::size_t>(r * f.width + c)];
  return sum / double(u.frames.size());
}

inline Grid<double> shift_rows_cols(const Grid<double>& g, int dy, int dx) {
  Grid<double> out(g.rows(), g.cols());
  for (Eigen::Index r = 0; r < g.rows(); ++r)
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
      Eigen::Index sr = r - dy, sc = c - dx;
      while (sr < 0) sr += g.rows();
      while (sc < 0) sc += g.cols();
      out(r, c) = g(sr % g.rows(), sc % g.cols());
    }
  return out;
}

}  // namespace oracle

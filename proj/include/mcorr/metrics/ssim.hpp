#ifndef MCORR_METRICS_SSIM_HPP
#define MCORR_METRICS_SSIM_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr::metrics {

/// Stabilizing constants c1 = (k1 L)^2 and c2 = (k2 L)^2. L defaults to 2,
/// the width of the signed_unit range.
struct SsimConstants {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 2.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }

  void validate() const {
    if (!(k1 > 0.0 && k2 > 0.0 && dynamic_range > 0.0)) throw DomainError("SSIM constants must be positive");
  }
};

/// First and second order statistics of a paired sample. Variances and
/// covariance are population (1/N) estimates.
struct PairStats {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov_xy = 0.0;
};

inline double ssim_from_stats(const PairStats& s, const SsimConstants& k) {
  const double c1 = k.c1();
  const double c2 = k.c2();
  return ((2.0 * s.mean_x * s.mean_y + c1) * (2.0 * s.cov_xy + c2)) /
         ((s.mean_x * s.mean_x + s.mean_y * s.mean_y + c1) * (s.var_x + s.var_y + c2));
}

inline PairStats pair_stats(std::span<const double> x, std::span<const double> y) {
  PairStats s;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s.mean_x += x[i];
    s.mean_y += y[i];
  }
  s.mean_x /= n;
  s.mean_y /= n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - s.mean_x;
    const double dy = y[i] - s.mean_y;
    s.var_x += dx * dx;
    s.var_y += dy * dy;
    s.cov_xy += dx * dy;
  }
  s.var_x /= n;
  s.var_y /= n;
  s.cov_xy /= n;
  return s;
}

/// SSIM of two equally shaped patches from whole-patch statistics.
inline double ssim_patch(std::span<const double> a, std::span<const double> b, const SsimConstants& consts = {}) {
  if (a.size() != b.size()) throw ShapeError("ssim_patch: patch sizes differ");
  if (a.empty()) throw ShapeError("ssim_patch: empty patch");
  return ssim_from_stats(pair_stats(a, b), consts);
}

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::array<double, kSsimWindow> gaussian_taps(double sigma = kSsimSigma) {
  std::array<double, kSsimWindow> g{};
  const double mid = 0.5 * static_cast<double>(kSsimWindow - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < kSsimWindow; ++i) {
    const double d = static_cast<double>(i) - mid;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

/// Per-window SSIM over every fully contained 11x11 Gaussian window.
/// Output is (width - 10) x (height - 10).
inline Image2D ssim_map(const Image2D& a, const Image2D& b, const SsimConstants& consts = {}) {
  require_same_shape(a, b, "ssim");
  require_single_channel(a, "ssim");
  consts.validate();
  const std::size_t w = a.width();
  const std::size_t h = a.height();
  if (w < kSsimWindow || h < kSsimWindow) {
    throw ShapeError("ssim: image " + std::to_string(w) + "x" + std::to_string(h) + " is smaller than the 11x11 window");
  }
  const auto g = gaussian_taps();
  const std::size_t ow = w - kSsimWindow + 1;
  const std::size_t oh = h - kSsimWindow + 1;
  const auto x = a.channel(0);
  const auto y = b.channel(0);

  // Horizontal pass of the five moment images, then vertical pass per output pixel.
  constexpr std::size_t kMoments = 5;
  std::vector<double> rows(kMoments * ow * h);
  parallel::parallel_for(h, [&](std::size_t r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double m[kMoments] = {0, 0, 0, 0, 0};
      for (std::size_t k = 0; k < kSsimWindow; ++k) {
        const double xv = x[r * w + c + k];
        const double yv = y[r * w + c + k];
        m[0] += g[k] * xv;
        m[1] += g[k] * yv;
        m[2] += g[k] * xv * xv;
        m[3] += g[k] * yv * yv;
        m[4] += g[k] * xv * yv;
      }
      for (std::size_t j = 0; j < kMoments; ++j) rows[(j * h + r) * ow + c] = m[j];
    }
  });

  Image2D out(ow, oh, 1, a.spacing_mm(), Domain::raw);
  auto dst = out.channel(0);
  parallel::parallel_for(oh, [&](std::size_t r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double m[kMoments] = {0, 0, 0, 0, 0};
      for (std::size_t k = 0; k < kSsimWindow; ++k) {
        for (std::size_t j = 0; j < kMoments; ++j) m[j] += g[k] * rows[(j * h + r + k) * ow + c];
      }
      PairStats s{m[0], m[1], m[2] - m[0] * m[0], m[3] - m[1] * m[1], m[4] - m[0] * m[1]};
      dst[r * ow + c] = ssim_from_stats(s, consts);
    }
  });
  return out;
}

/// Mean of ssim_map.
inline double ssim_global(const Image2D& a, const Image2D& b, const SsimConstants& consts = {}) {
  const Image2D map = ssim_map(a, b, consts);
  double sum = 0.0;
  for (double v : map.data()) sum += v;
  return sum / static_cast<double>(map.size());
}

}  // namespace mcorr::metrics

#endif  // MCORR_METRICS_SSIM_HPP

#ifndef MCORR_LOSS_TV_HPP
#define MCORR_LOSS_TV_HPP

#include <cmath>
#include <cstddef>

#include "mcorr/image.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"

namespace mcorr::loss {

inline constexpr double kTvEpsilon = 1e-6;

/// Smoothed isotropic total variation sum sqrt(dx^2 + dy^2 + eps^2) with
/// forward differences; differences across the last column / row are zero.
inline LossValueGrad tv_regularizer(const Image2D& img, double eps = kTvEpsilon) {
  require_single_channel(img, "tv_regularizer");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const auto u = img.channel(0);
  LossValueGrad out{0.0, zero_gradient(img)};
  auto g = out.grad.channel(0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      const double dx = x + 1 < w ? u[i + 1] - u[i] : 0.0;
      const double dy = y + 1 < h ? u[i + w] - u[i] : 0.0;
      const double norm = std::sqrt(dx * dx + dy * dy + eps * eps);
      out.value += norm;
      if (x + 1 < w) {
        g[i] -= dx / norm;
        g[i + 1] += dx / norm;
      }
      if (y + 1 < h) {
        g[i] -= dy / norm;
        g[i + w] += dy / norm;
      }
    }
  }
  return out;
}

}  // namespace mcorr::loss

#endif  // MCORR_LOSS_TV_HPP

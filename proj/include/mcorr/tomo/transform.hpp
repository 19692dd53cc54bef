#ifndef MCORR_TOMO_TRANSFORM_HPP
#define MCORR_TOMO_TRANSFORM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "mcorr/image.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/tomo/trajectory.hpp"

namespace mcorr::tomo {

/// Bilinear sample of a width x height plane at fractional pixel coordinates.
/// Neighbours outside the grid contribute zero.
inline double sample_bilinear(std::span<const double> plane, std::size_t width, std::size_t height, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  if (fx < -1.0 || fy < -1.0 || fx >= static_cast<double>(width) || fy >= static_cast<double>(height)) return 0.0;
  const auto x0 = static_cast<std::ptrdiff_t>(fx);
  const auto y0 = static_cast<std::ptrdiff_t>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  const auto w = static_cast<std::ptrdiff_t>(width);
  const auto h = static_cast<std::ptrdiff_t>(height);
  auto value = [&](std::ptrdiff_t xi, std::ptrdiff_t yi) {
    if (xi < 0 || yi < 0 || xi >= w || yi >= h) return 0.0;
    return plane[static_cast<std::size_t>(yi * w + xi)];
  };
  const double top = value(x0, y0) * (1.0 - ax) + value(x0 + 1, y0) * ax;
  const double bottom = value(x0, y0 + 1) * (1.0 - ax) + value(x0 + 1, y0 + 1) * ax;
  return top * (1.0 - ay) + bottom * ay;
}

/// Moves the object by pose: scale radially about the centre by breath_scale,
/// rotate by theta, then translate. Implemented by inverse mapping each output
/// pixel and sampling the input bilinearly; samples off the grid are zero.
inline Image2D transform_image(const Image2D& img, const RigidPose& pose) {
  require_single_channel(img, "transform_image");
  if (!(pose.breath_scale > 0.0)) throw DomainError("breath_scale must be positive");
  if (pose.is_identity()) return img;

  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const double cx = 0.5 * static_cast<double>(w - 1);
  const double cy = 0.5 * static_cast<double>(h - 1);
  const double tx = pose.tx_mm / img.spacing_mm();
  const double ty = pose.ty_mm / img.spacing_mm();
  const double c = std::cos(pose.theta_rad);
  const double s = std::sin(pose.theta_rad);
  const double inv_scale = 1.0 / pose.breath_scale;

  Image2D out(w, h, 1, img.spacing_mm(), Domain::raw);
  const auto src = img.channel(0);
  auto dst = out.channel(0);
  parallel::parallel_for(h, [&](std::size_t y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double px = static_cast<double>(x) - cx - tx;
      const double py = static_cast<double>(y) - cy - ty;
      const double ux = (c * px + s * py) * inv_scale + cx;
      const double uy = (-s * px + c * py) * inv_scale + cy;
      dst[y * w + x] = sample_bilinear(src, w, h, ux, uy);
    }
  });
  if (img.domain() == Domain::signed_unit) {
    for (double& v : dst) v = std::clamp(v, -1.0, 1.0);
    out.set_domain(Domain::signed_unit);
  }
  return out;
}

}  // namespace mcorr::tomo

#endif  // MCORR_TOMO_TRANSFORM_HPP

#ifndef MCORR_TOMO_PHANTOM_HPP
#define MCORR_TOMO_PHANTOM_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"

namespace mcorr::tomo {

/// Rotated ellipse in millimetres about the image centre; +y points down the rows.
struct Ellipse {
  double center_x_mm = 0.0;
  double center_y_mm = 0.0;
  double semi_axis_a_mm = 1.0;
  double semi_axis_b_mm = 1.0;
  double rotation_rad = 0.0;
  double additive_intensity = 1.0;

  bool contains(double x_mm, double y_mm) const {
    const double dx = x_mm - center_x_mm;
    const double dy = y_mm - center_y_mm;
    const double c = std::cos(rotation_rad);
    const double s = std::sin(rotation_rad);
    const double u = (c * dx + s * dy) / semi_axis_a_mm;
    const double v = (-s * dx + c * dy) / semi_axis_b_mm;
    return u * u + v * v <= 1.0;
  }
};

struct PhantomSpec {
  std::vector<Ellipse> ellipses;
  std::size_t width = 256;
  std::size_t height = 256;
  double spacing_mm = 1.0;

  void validate() const {
    if (ellipses.empty()) throw DomainError("phantom needs at least one ellipse");
    for (const auto& e : ellipses) {
      if (!(e.semi_axis_a_mm > 0.0) || !(e.semi_axis_b_mm > 0.0)) throw DomainError("ellipse semi-axes must be positive");
    }
    if (width == 0 || height == 0) throw DomainError("phantom canvas must be non-empty");
    if (!(spacing_mm > 0.0)) throw DomainError("phantom spacing must be positive");
  }
};

/// Physical coordinate of pixel index i along an axis of n pixels.
inline double pixel_center_mm(std::size_t i, std::size_t n, double spacing_mm) {
  return (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * spacing_mm;
}

/// Sum of ellipse intensities at each pixel centre.
inline Image2D make_phantom(const PhantomSpec& spec) {
  spec.validate();
  Image2D img(spec.width, spec.height, 1, spec.spacing_mm, Domain::raw);
  for (std::size_t y = 0; y < spec.height; ++y) {
    const double ym = pixel_center_mm(y, spec.height, spec.spacing_mm);
    for (std::size_t x = 0; x < spec.width; ++x) {
      const double xm = pixel_center_mm(x, spec.width, spec.spacing_mm);
      double v = 0.0;
      for (const auto& e : spec.ellipses) {
        if (e.contains(xm, ym)) v += e.additive_intensity;
      }
      img.at(x, y) = v;
    }
  }
  return img;
}

inline PhantomSpec disk_phantom(std::size_t size, double spacing_mm, double radius_mm, double intensity = 1.0) {
  PhantomSpec spec;
  spec.width = spec.height = size;
  spec.spacing_mm = spacing_mm;
  spec.ellipses.push_back({0.0, 0.0, radius_mm, radius_mm, 0.0, intensity});
  return spec;
}

/// Axial chest-like slice: body outline, two lungs, heart, spine, sternum,
/// ribs, and a few nodules. Geometry scales with the canvas's physical extent.
/// Intensities are relative attenuation (air 0, soft tissue 1, bone about 1.8).
inline PhantomSpec chest_phantom(std::size_t width, std::size_t height, double spacing_mm) {
  const double half = 0.5 * std::min(static_cast<double>(width), static_cast<double>(height)) * spacing_mm;
  const double k = half / 128.0;
  const double deg = std::numbers::pi / 180.0;
  PhantomSpec spec;
  spec.width = width;
  spec.height = height;
  spec.spacing_mm = spacing_mm;
  auto add = [&](double cx, double cy, double a, double b, double rot_deg, double v) {
    spec.ellipses.push_back({cx * k, cy * k, a * k, b * k, rot_deg * deg, v});
  };
  add(0, 0, 112, 80, 0, 1.0);           // body
  add(-46, -4, 36, 56, 8, -0.75);       // right lung
  add(46, -4, 34, 54, -8, -0.75);       // left lung
  add(12, 10, 30, 26, -20, 0.08);       // heart
  add(0, 58, 11, 11, 0, 0.8);           // vertebral body
  add(0, 72, 5, 7, 0, 0.8);             // spinous process
  add(0, -66, 8, 4, 0, 0.7);            // sternum
  add(-92, 18, 4, 12, 25, 0.7);         // ribs
  add(92, 18, 4, 12, -25, 0.7);
  add(-78, -44, 4, 10, -35, 0.7);
  add(78, -44, 4, 10, 35, 0.7);
  add(-52, -22, 5, 5, 0, 0.7);          // nodules
  add(40, -30, 4, 4, 0, 0.7);
  add(-38, 24, 3, 3, 0, 0.6);
  add(56, 20, 6, 4, 30, 0.6);
  add(-20, -8, 4, 14, 10, 0.5);          // vessels
  add(22, -18, 3, 12, -15, 0.5);
  return spec;
}

}  // namespace mcorr::tomo

#endif  // MCORR_TOMO_PHANTOM_HPP

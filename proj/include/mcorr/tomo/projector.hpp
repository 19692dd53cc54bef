#ifndef MCORR_TOMO_PROJECTOR_HPP
#define MCORR_TOMO_PROJECTOR_HPP

// 2-D parallel-beam geometry. View v sits at angle theta_v = v * range / n_views.
// Detector bin d has signed offset s_d = (d - (n_detectors - 1) / 2) * spacing
// along (cos theta, sin theta); its ray runs along (-sin theta, cos theta).
// Image coordinates are millimetres about the grid centre, x along columns
// and y along rows.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/parallel.hpp"
#include "mcorr/tomo/phantom.hpp"
#include "mcorr/tomo/trajectory.hpp"
#include "mcorr/tomo/transform.hpp"

namespace mcorr::tomo {

struct ScanGeometry {
  std::size_t n_views = 360;
  double angular_range = std::numbers::pi;
  std::size_t n_detectors = 256;
  double detector_spacing_mm = 1.0;
  double ray_step_mm = 0.5;

  void validate() const {
    if (n_views < 1) throw DomainError("n_views must be at least 1");
    if (!(angular_range > 0.0)) throw DomainError("angular_range must be positive");
    if (n_detectors < 2) throw DomainError("n_detectors must be at least 2");
    if (!(detector_spacing_mm > 0.0)) throw DomainError("detector_spacing_mm must be positive");
    if (!(ray_step_mm > 0.0 && ray_step_mm <= detector_spacing_mm)) {
      throw DomainError("ray_step_mm must lie in (0, detector_spacing_mm]");
    }
  }

  double view_angle(std::size_t v) const { return static_cast<double>(v) * angular_range / static_cast<double>(n_views); }

  /// Detector row wide enough to cover the image diagonal at every angle.
  static ScanGeometry covering(const Image2D& img, std::size_t n_views = 360) {
    ScanGeometry g;
    g.n_views = n_views;
    g.detector_spacing_mm = img.spacing_mm();
    g.ray_step_mm = 0.5 * img.spacing_mm();
    const double diag = std::hypot(static_cast<double>(img.width()), static_cast<double>(img.height()));
    g.n_detectors = static_cast<std::size_t>(std::ceil(diag)) + 2;
    return g;
  }
};

/// View-major line integrals.
struct Sinogram {
  std::size_t n_views = 0;
  std::size_t n_detectors = 0;
  std::vector<double> angles;
  double detector_spacing_mm = 1.0;
  double angular_range = std::numbers::pi;
  std::vector<double> data;

  double& at(std::size_t view, std::size_t det) { return data[view * n_detectors + det]; }
  double at(std::size_t view, std::size_t det) const { return data[view * n_detectors + det]; }

  double detector_offset(std::size_t det) const {
    return (static_cast<double>(det) - 0.5 * static_cast<double>(n_detectors - 1)) * detector_spacing_mm;
  }

  void validate() const {
    if (n_views < 1 || n_detectors < 2) throw ShapeError("sinogram needs >= 1 view and >= 2 detectors");
    if (data.size() != n_views * n_detectors) throw ShapeError("sinogram data length mismatch");
    if (angles.size() != n_views) throw ShapeError("sinogram needs one angle per view");
    if (!(detector_spacing_mm > 0.0)) throw DomainError("detector spacing must be positive");
    for (std::size_t v = 0; v < n_views; ++v) {
      if (angles[v] < 0.0 || angles[v] >= angular_range || (v > 0 && !(angles[v] > angles[v - 1]))) {
        throw DomainError("sinogram angles must increase strictly within [0, angular_range)");
      }
    }
  }

  static Sinogram zeros_like(const Sinogram& s) {
    Sinogram out = s;
    std::fill(out.data.begin(), out.data.end(), 0.0);
    return out;
  }

  /// IMG2D carrier: width = detectors, height = views, raw domain.
  Image2D as_image() const {
    return Image2D(n_detectors, n_views, 1, detector_spacing_mm, Domain::raw, data);
  }
};

namespace detail {

inline Sinogram empty_sinogram(const ScanGeometry& geom) {
  Sinogram s;
  s.n_views = geom.n_views;
  s.n_detectors = geom.n_detectors;
  s.detector_spacing_mm = geom.detector_spacing_mm;
  s.angular_range = geom.angular_range;
  s.angles.resize(geom.n_views);
  for (std::size_t v = 0; v < geom.n_views; ++v) s.angles[v] = geom.view_angle(v);
  s.data.assign(geom.n_views * geom.n_detectors, 0.0);
  return s;
}

// Ray-driven projection of one view into row[0 .. n_detectors).
inline void project_view(const Image2D& img, const ScanGeometry& geom, double angle, double* row) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const double sp = img.spacing_mm();
  const double cx = 0.5 * static_cast<double>(w - 1);
  const double cy = 0.5 * static_cast<double>(h - 1);
  const double half_len = 0.5 * std::hypot(static_cast<double>(w + 1), static_cast<double>(h + 1)) * sp;
  const auto n_steps = static_cast<std::size_t>(std::ceil(2.0 * half_len / geom.ray_step_mm));
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const auto plane = img.channel(0);
  for (std::size_t d = 0; d < geom.n_detectors; ++d) {
    const double offset = (static_cast<double>(d) - 0.5 * static_cast<double>(geom.n_detectors - 1)) * geom.detector_spacing_mm;
    double sum = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double l = -half_len + (static_cast<double>(k) + 0.5) * geom.ray_step_mm;
      const double x = offset * c - l * s;
      const double y = offset * s + l * c;
      sum += sample_bilinear(plane, w, h, x / sp + cx, y / sp + cy);
    }
    row[d] = sum * geom.ray_step_mm;
  }
}

}  // namespace detail

/// Line integrals of img. With a trajectory, the object is moved per shot by
/// the pose at the shot's midpoint time; every view of a shot shares it.
inline Sinogram forward_project(const Image2D& img, const ScanGeometry& geom,
                                const std::optional<MotionTrajectory>& traj = std::nullopt) {
  require_single_channel(img, "forward_project");
  geom.validate();
  Sinogram sino = detail::empty_sinogram(geom);

  std::vector<Image2D> shot_images;
  if (traj) {
    traj->validate();
    shot_images.reserve(traj->n_shots);
    for (std::size_t shot = 0; shot < traj->n_shots; ++shot) {
      shot_images.push_back(transform_image(img, eval_trajectory(*traj, traj->shot_time(shot))));
    }
  }
  parallel::parallel_for(geom.n_views, [&](std::size_t v) {
    const Image2D& src = traj ? shot_images[traj->shot_of_view(v, geom.n_views)] : img;
    detail::project_view(src, geom, sino.angles[v], &sino.data[v * geom.n_detectors]);
  });
  return sino;
}

enum class RampWindow { none, hann };

/// Ram-Lak kernel tap n for detector spacing ds.
inline double ramlak_tap(std::ptrdiff_t n, double ds) {
  if (n == 0) return 1.0 / (4.0 * ds * ds);
  if (n % 2 == 0) return 0.0;
  const double d = std::numbers::pi * static_cast<double>(n) * ds;
  return -1.0 / (d * d);
}

/// Spatial-domain ramp filtering of every view:
/// q[k] = ds * sum_m p[m] h[k - m], with the Ram-Lak kernel h truncated at
/// +-n_detectors. The Hann option smooths the kernel with [1/4, 1/2, 1/4],
/// the spatial counterpart of a raised-cosine apodization.
inline Sinogram ramp_filter(const Sinogram& sino, RampWindow window = RampWindow::none) {
  sino.validate();
  const std::size_t n = sino.n_detectors;
  const double ds = sino.detector_spacing_mm;
  const auto span = static_cast<std::ptrdiff_t>(n);
  std::vector<double> kernel(2 * n + 1);
  for (std::ptrdiff_t k = -span; k <= span; ++k) {
    double tap = ramlak_tap(k, ds);
    if (window == RampWindow::hann) tap = 0.5 * tap + 0.25 * (ramlak_tap(k - 1, ds) + ramlak_tap(k + 1, ds));
    kernel[static_cast<std::size_t>(k + span)] = tap;
  }
  Sinogram out = Sinogram::zeros_like(sino);
  parallel::parallel_for(sino.n_views, [&](std::size_t v) {
    const double* p = &sino.data[v * n];
    double* q = &out.data[v * n];
    for (std::size_t k = 0; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        acc += p[m] * kernel[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(m) + span)];
      }
      q[k] = ds * acc;
    }
  });
  return out;
}

/// Smears every view back over a width x height grid:
/// f(x, y) = (range / n_views) * sum_v q_v(x cos theta_v + y sin theta_v),
/// with linear interpolation between detector bins (zero beyond the row).
inline Image2D backproject(const Sinogram& sino, std::size_t width, std::size_t height, double spacing_mm) {
  sino.validate();
  Image2D img(width, height, 1, spacing_mm, Domain::raw);
  const double weight = sino.angular_range / static_cast<double>(sino.n_views);
  const double center_det = 0.5 * static_cast<double>(sino.n_detectors - 1);
  std::vector<double> cos_t(sino.n_views), sin_t(sino.n_views);
  for (std::size_t v = 0; v < sino.n_views; ++v) {
    cos_t[v] = std::cos(sino.angles[v]);
    sin_t[v] = std::sin(sino.angles[v]);
  }
  auto out = img.channel(0);
  const auto n_det = static_cast<std::ptrdiff_t>(sino.n_detectors);
  parallel::parallel_for(height, [&](std::size_t y) {
    const double ym = pixel_center_mm(y, height, spacing_mm);
    for (std::size_t x = 0; x < width; ++x) {
      const double xm = pixel_center_mm(x, width, spacing_mm);
      double acc = 0.0;
      for (std::size_t v = 0; v < sino.n_views; ++v) {
        const double u = (xm * cos_t[v] + ym * sin_t[v]) / sino.detector_spacing_mm + center_det;
        const double fu = std::floor(u);
        const auto i0 = static_cast<std::ptrdiff_t>(fu);
        if (i0 < -1 || i0 >= n_det) continue;
        const double a = u - fu;
        const double* row = &sino.data[v * sino.n_detectors];
        const double lo = i0 >= 0 ? row[i0] : 0.0;
        const double hi = i0 + 1 < n_det ? row[i0 + 1] : 0.0;
        acc += lo * (1.0 - a) + hi * a;
      }
      out[y * width + x] = weight * acc;
    }
  });
  return img;
}

/// Ramp filter followed by backprojection onto the given grid.
inline Image2D filtered_backprojection(const Sinogram& sino, std::size_t width, std::size_t height, double spacing_mm,
                                       RampWindow window = RampWindow::none) {
  return backproject(ramp_filter(sino, window), width, height, spacing_mm);
}

}  // namespace mcorr::tomo

#endif  // MCORR_TOMO_PROJECTOR_HPP

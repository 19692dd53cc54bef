#ifndef MCORR_TOMO_TRAJECTORY_HPP
#define MCORR_TOMO_TRAJECTORY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mcorr/error.hpp"

namespace mcorr::tomo {

/// In-plane rigid pose plus a radial breathing scale about the image centre.
struct RigidPose {
  double tx_mm = 0.0;
  double ty_mm = 0.0;
  double theta_rad = 0.0;
  double breath_scale = 1.0;

  bool is_identity() const { return tx_mm == 0.0 && ty_mm == 0.0 && theta_rad == 0.0 && breath_scale == 1.0; }

  friend bool operator==(const RigidPose&, const RigidPose&) = default;
};

/// Step-and-shoot motion: the pose is piecewise constant over n_shots
/// contiguous equal blocks of views, sampled from a cubic B-spline through
/// the control poses at each shot's midpoint time.
struct MotionTrajectory {
  std::vector<RigidPose> control_poses;
  std::size_t n_shots = 1;

  void validate() const {
    if (control_poses.size() < 4) throw DomainError("trajectory needs at least 4 control poses");
    if (n_shots == 0) throw DomainError("trajectory needs at least one shot");
    for (const auto& p : control_poses) {
      if (!(p.breath_scale > 0.0)) throw DomainError("breath_scale must be positive");
    }
  }

  /// Shot owning view v of n_views.
  std::size_t shot_of_view(std::size_t view, std::size_t n_views) const { return view * n_shots / n_views; }

  /// Midpoint of shot s in trajectory time [0, 1].
  double shot_time(std::size_t shot) const { return (static_cast<double>(shot) + 0.5) / static_cast<double>(n_shots); }

  static MotionTrajectory stationary(std::size_t n_shots = 1) {
    return MotionTrajectory{std::vector<RigidPose>(4), n_shots};
  }
};

namespace detail {

inline std::array<double, 4> cubic_bspline_basis(double u) {
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double v = 1.0 - u;
  return {v * v * v / 6.0, (3.0 * u3 - 6.0 * u2 + 4.0) / 6.0, (-3.0 * u3 + 3.0 * u2 + 3.0 * u + 1.0) / 6.0, u3 / 6.0};
}

}  // namespace detail

/// Uniform cubic B-spline value at t in [0, 1] for scalar controls.
///
/// The control polygon is extended by one phantom point at each end,
/// 2*c[0] - c[1] and 2*c[n-1] - c[n-2], so the curve interpolates the first
/// and last controls while keeping linear precision. Time maps linearly onto
/// the n - 1 segments between consecutive controls.
inline double eval_cubic_bspline(const std::vector<double>& controls, double t) {
  const std::size_t n = controls.size();
  if (n < 2) throw DomainError("spline needs at least 2 controls");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("trajectory time must lie in [0, 1]");
  // Constant controls reproduce exactly; the basis weights only sum to 1 up to rounding.
  if (std::all_of(controls.begin(), controls.end(), [&](double c) { return c == controls[0]; })) return controls[0];
  auto control = [&](std::ptrdiff_t i) {
    if (i < 0) return 2.0 * controls[0] - controls[1];
    if (i >= static_cast<std::ptrdiff_t>(n)) return 2.0 * controls[n - 1] - controls[n - 2];
    return controls[static_cast<std::size_t>(i)];
  };
  const double s = t * static_cast<double>(n - 1);
  const auto seg = std::min(static_cast<std::size_t>(s), n - 2);
  const double u = s - static_cast<double>(seg);
  const auto w = detail::cubic_bspline_basis(u);
  const auto j = static_cast<std::ptrdiff_t>(seg);
  return w[0] * control(j - 1) + w[1] * control(j) + w[2] * control(j + 1) + w[3] * control(j + 2);
}

/// Pose at time t, each component splined independently.
inline RigidPose eval_trajectory(const MotionTrajectory& traj, double t) {
  traj.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("trajectory time must lie in [0, 1]");
  auto component = [&](double RigidPose::*field) {
    std::vector<double> c;
    c.reserve(traj.control_poses.size());
    for (const auto& p : traj.control_poses) c.push_back(p.*field);
    return eval_cubic_bspline(c, t);
  };
  RigidPose pose{component(&RigidPose::tx_mm), component(&RigidPose::ty_mm), component(&RigidPose::theta_rad),
                 component(&RigidPose::breath_scale)};
  if (!(pose.breath_scale > 0.0)) throw DomainError("trajectory evaluates to a non-positive breath_scale");
  return pose;
}

}  // namespace mcorr::tomo

#endif  // MCORR_TOMO_TRAJECTORY_HPP

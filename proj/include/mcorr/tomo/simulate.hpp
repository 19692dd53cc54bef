#ifndef MCORR_TOMO_SIMULATE_HPP
#define MCORR_TOMO_SIMULATE_HPP

#include "mcorr/image.hpp"
#include "mcorr/tomo/phantom.hpp"
#include "mcorr/tomo/projector.hpp"
#include "mcorr/tomo/trajectory.hpp"

namespace mcorr::tomo {

struct IntensityWindow {
  double lo = 0.0;
  double hi = 2.0;
};

/// Paired motion-corrupted / motion-free reconstructions of one phantom,
/// with the sinograms they were reconstructed from.
struct ScanPair {
  Image2D phantom;
  Sinogram reference_sinogram;
  Sinogram corrupted_sinogram;
  Image2D reference;
  Image2D corrupted;
};

inline ScanPair simulate_motion_scan(const PhantomSpec& spec, const ScanGeometry& geom, const MotionTrajectory& traj,
                                     const IntensityWindow& window, RampWindow filter = RampWindow::none) {
  spec.validate();
  geom.validate();
  traj.validate();
  ScanPair out;
  out.phantom = make_phantom(spec);
  out.reference_sinogram = forward_project(out.phantom, geom);
  out.corrupted_sinogram = forward_project(out.phantom, geom, traj);
  auto reconstruct = [&](const Sinogram& s) {
    return normalize_to_signed_unit(filtered_backprojection(s, spec.width, spec.height, spec.spacing_mm, filter), window.lo,
                                    window.hi);
  };
  out.reference = reconstruct(out.reference_sinogram);
  out.corrupted = reconstruct(out.corrupted_sinogram);
  return out;
}

}  // namespace mcorr::tomo

#endif  // MCORR_TOMO_SIMULATE_HPP

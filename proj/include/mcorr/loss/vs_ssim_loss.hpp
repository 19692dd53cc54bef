#ifndef MCORR_LOSS_VS_SSIM_LOSS_HPP
#define MCORR_LOSS_VS_SSIM_LOSS_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/metrics/selection.hpp"
#include "mcorr/metrics/ssim.hpp"

namespace mcorr::loss {

/// Objective weights and VS-SSIM settings.
struct LossConfig {
  double lambda_a = 1.0;   // VS-SSIM term
  double lambda_b = 0.0;   // auxiliary regularizers
  double tv_weight = 0.0;  // total-variation prior
  std::size_t patch_size = metrics::kDefaultPatchSize;
  double rho = metrics::kDefaultRho;
  metrics::SsimConstants consts;
  std::optional<MaskFeatureMap> mask;
  double coverage_min = kDefaultCoverageMin;
  double dice_threshold = metrics::kDefaultDiceThreshold;

  void validate() const {
    if (!(lambda_a >= 0.0) || !(lambda_b >= 0.0) || !(tv_weight >= 0.0)) {
      throw DomainError("loss weights must be non-negative");
    }
    if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
    if (patch_size < 2) throw DomainError("patch_size must be at least 2");
    if (!(coverage_min >= 0.0 && coverage_min <= 1.0)) throw DomainError("coverage_min must lie in [0, 1]");
    consts.validate();
  }
};

/// Loss value and its gradient with respect to every pixel of the input.
struct LossValueGrad {
  double value = 0.0;
  Image2D grad;
};

inline Image2D zero_gradient(const Image2D& like) {
  return Image2D(like.width(), like.height(), like.channels(), like.spacing_mm(), Domain::raw);
}

/// 1 - VS-SSIM(gt, gen) with the selection fixed by the ground truth.
///
/// Because the patch ranking only depends on gt, it is computed once here and
/// treated as a constant, so the loss is smooth in gen. Pixels outside the
/// selected patches get an exactly zero gradient.
class VsSsimLoss {
 public:
  VsSsimLoss(Image2D gt, const LossConfig& cfg)
      : gt_(std::move(gt)),
        consts_((cfg.validate(), cfg.consts)),
        selection_(metrics::select_patches(gt_, cfg.patch_size, cfg.rho, cfg.mask, cfg.coverage_min)) {}

  const metrics::PatchSelection& selection() const noexcept { return selection_; }
  const Image2D& ground_truth() const noexcept { return gt_; }

  LossValueGrad operator()(const Image2D& gen) const {
    require_same_shape(gen, gt_, "vs_ssim_loss");
    require_single_channel(gen, "vs_ssim_loss");
    LossValueGrad out{0.0, zero_gradient(gen)};
    const std::size_t w = gen.width();
    const std::size_t p = selection_.grid.patch_size;
    const double n = static_cast<double>(p * p);
    const double c1 = consts_.c1();
    const double c2 = consts_.c2();
    const double scale = -1.0 / static_cast<double>(selection_.selected.size());
    const auto x = gt_.channel(0);
    const auto y = gen.channel(0);
    auto g = out.grad.channel(0);

    double ssim_sum = 0.0;
    for (auto cell : selection_.selected) {
      const std::size_t base = selection_.grid.origin_index(cell, w);
      metrics::PairStats s;
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) {
          const std::size_t i = base + dy * w + dx;
          s.mean_x += x[i];
          s.mean_y += y[i];
        }
      }
      s.mean_x /= n;
      s.mean_y /= n;
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) {
          const std::size_t i = base + dy * w + dx;
          const double ex = x[i] - s.mean_x;
          const double ey = y[i] - s.mean_y;
          s.var_x += ex * ex;
          s.var_y += ey * ey;
          s.cov_xy += ex * ey;
        }
      }
      s.var_x /= n;
      s.var_y /= n;
      s.cov_xy /= n;

      const double a1 = 2.0 * s.mean_x * s.mean_y + c1;
      const double a2 = 2.0 * s.cov_xy + c2;
      const double b1 = s.mean_x * s.mean_x + s.mean_y * s.mean_y + c1;
      const double b2 = s.var_x + s.var_y + c2;
      const double ssim = (a1 * a2) / (b1 * b2);
      ssim_sum += ssim;

      // dS/dy_i = (2/N) [ (mu_x a2 + a1 (x_i - mu_x)) / (b1 b2) - S (mu_y / b1 + (y_i - mu_y) / b2) ]
      const double inv_b = 1.0 / (b1 * b2);
      for (std::size_t dy = 0; dy < p; ++dy) {
        for (std::size_t dx = 0; dx < p; ++dx) {
          const std::size_t i = base + dy * w + dx;
          const double d_ssim = (2.0 / n) * ((s.mean_x * a2 + a1 * (x[i] - s.mean_x)) * inv_b -
                                             ssim * (s.mean_y / b1 + (y[i] - s.mean_y) / b2));
          g[i] = scale * d_ssim;
        }
      }
    }
    out.value = 1.0 - ssim_sum / static_cast<double>(selection_.selected.size());
    return out;
  }

 private:
  Image2D gt_;
  metrics::SsimConstants consts_;
  metrics::PatchSelection selection_;
};

inline LossValueGrad vs_ssim_loss(const Image2D& gen, const Image2D& gt, const LossConfig& cfg) {
  require_same_shape(gen, gt, "vs_ssim_loss");
  return VsSsimLoss(gt, cfg)(gen);
}

}  // namespace mcorr::loss

#endif  // MCORR_LOSS_VS_SSIM_LOSS_HPP

#ifndef MCORR_LOSS_TOTAL_HPP
#define MCORR_LOSS_TOTAL_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "mcorr/image.hpp"
#include "mcorr/loss/tv.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"

namespace mcorr::loss {

/// A differentiable penalty on the generated image.
using Regularizer = std::function<LossValueGrad(const Image2D&)>;

namespace detail {
inline void accumulate(LossValueGrad& into, const LossValueGrad& term, double weight) {
  into.value += weight * term.value;
  auto dst = into.grad.data();
  const auto src = term.grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += weight * src[i];
}
}  // namespace detail

/// lambda_a * (1 - VS-SSIM) + lambda_b * sum(aux) + tv_weight * TV.
/// Terms with zero weight are not evaluated.
class TotalLoss {
 public:
  TotalLoss(const Image2D& gt, LossConfig cfg, std::vector<Regularizer> aux = {})
      : cfg_(std::move(cfg)), vs_ssim_(gt, cfg_), aux_(std::move(aux)) {}

  const LossConfig& config() const noexcept { return cfg_; }
  const VsSsimLoss& vs_ssim_term() const noexcept { return vs_ssim_; }

  LossValueGrad operator()(const Image2D& gen) const {
    require_same_shape(gen, vs_ssim_.ground_truth(), "total_loss");
    LossValueGrad out{0.0, zero_gradient(gen)};
    if (cfg_.lambda_a != 0.0) detail::accumulate(out, vs_ssim_(gen), cfg_.lambda_a);
    if (cfg_.lambda_b != 0.0) {
      for (const auto& reg : aux_) detail::accumulate(out, reg(gen), cfg_.lambda_b);
    }
    if (cfg_.tv_weight != 0.0) detail::accumulate(out, tv_regularizer(gen), cfg_.tv_weight);
    return out;
  }

 private:
  LossConfig cfg_;
  VsSsimLoss vs_ssim_;
  std::vector<Regularizer> aux_;
};

inline LossValueGrad total_loss(const Image2D& gen, const Image2D& gt, const LossConfig& cfg,
                                const std::vector<Regularizer>& aux = {}) {
  return TotalLoss(gt, cfg, aux)(gen);
}

}  // namespace mcorr::loss

#endif  // MCORR_LOSS_TOTAL_HPP

#ifndef MCORR_CORRECTION_OPTIMIZER_HPP
#define MCORR_CORRECTION_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/loss/total.hpp"
#include "mcorr/metrics/metrics.hpp"

namespace mcorr::correction {

struct OptimizerConfig {
  std::size_t max_iters = 200;
  double initial_step = 1e4;
  double backtracking_factor = 0.5;
  double sufficient_decrease = 1e-4;
  double convergence_tol = 1e-6;
  bool clamp_domain = true;
  std::size_t max_backtracks = 60;

  void validate() const {
    if (!(initial_step > 0.0)) throw DomainError("initial_step must be positive");
    if (!(convergence_tol > 0.0 && convergence_tol < 1.0)) throw DomainError("convergence_tol must lie in (0, 1)");
    if (!(backtracking_factor > 0.0 && backtracking_factor < 1.0)) throw DomainError("backtracking_factor must lie in (0, 1)");
    if (!(sufficient_decrease > 0.0 && sufficient_decrease < 1.0)) throw DomainError("sufficient_decrease must lie in (0, 1)");
  }
};

inline constexpr double kLossRoundoff = 64 * std::numeric_limits<double>::epsilon();

struct TraceRecord {
  std::size_t iter = 0;
  double loss = 0.0;
  double step = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Iteration 0 is the starting point; each later record is an accepted step.
struct OptimizationTrace {
  std::vector<TraceRecord> records;

  static constexpr const char* kCsvHeader = "iter,loss,step,psnr_db,ssim";

  std::string to_csv() const {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : records) {
      out += std::to_string(r.iter) + "," + metrics::format_fixed(r.loss) + "," + metrics::format_fixed(r.step) + "," +
             metrics::format_fixed(r.psnr_db) + "," + metrics::format_fixed(r.ssim) + "\n";
    }
    return out;
  }
};

enum class StopReason { max_iters, converged, stationary, line_search_failed };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::converged: return "converged";
    case StopReason::stationary: return "stationary";
    case StopReason::line_search_failed: return "line_search_failed";
  }
  return "unknown";
}

struct CorrectionResult {
  Image2D corrected;
  OptimizationTrace trace;
  StopReason stop = StopReason::max_iters;
};

/// Steepest descent on the total loss from y0 = corrupted.
///
/// Each iteration tries step s = initial_step and halves it until
/// loss(y - s g) <= loss(y) - c s |g|^2 (c = sufficient_decrease). With
/// clamp_domain the trial point is projected onto [-1, 1]. Stops after
/// max_iters accepted steps, when the relative loss decrease falls below
/// convergence_tol, at a zero gradient or a loss at rounding level, or when no step is accepted.
inline CorrectionResult optimize_correction(const Image2D& corrupted, const Image2D& gt, const loss::LossConfig& loss_cfg,
                                            const OptimizerConfig& opt_cfg, std::vector<loss::Regularizer> aux = {}) {
  require_same_shape(corrupted, gt, "optimize_correction");
  require_single_channel(corrupted, "optimize_correction");
  opt_cfg.validate();
  if (!(loss_cfg.lambda_a > 0.0)) throw DomainError("optimize_correction requires lambda_a > 0");
  const loss::TotalLoss objective(gt, loss_cfg, std::move(aux));

  auto record = [&](std::size_t iter, double value, double step, const Image2D& y) {
    return TraceRecord{iter, value, step, metrics::psnr(y, gt), metrics::ssim_global(y, gt, loss_cfg.consts)};
  };

  CorrectionResult result;
  Image2D y = corrupted;
  loss::LossValueGrad current = objective(y);
  if (!std::isfinite(current.value)) throw NumericError("loss is not finite at the starting image");
  result.trace.records.push_back(record(0, current.value, 0.0, y));

  Image2D trial = y;
  for (std::size_t iter = 1; iter <= opt_cfg.max_iters; ++iter) {
    const auto g = current.grad.data();
    double g_norm2 = 0.0;
    for (double v : g) g_norm2 += v * v;
    if (g_norm2 == 0.0) {
      result.stop = StopReason::stationary;
      break;
    }
    // 1 - SSIM at y == gt is rounding noise, not something to descend on
    if (std::abs(current.value) <= kLossRoundoff) {
      result.stop = StopReason::converged;
      break;
    }

    double step = opt_cfg.initial_step;
    bool accepted = false;
    loss::LossValueGrad next;
    for (std::size_t tries = 0; tries <= opt_cfg.max_backtracks; ++tries, step *= opt_cfg.backtracking_factor) {
      const auto src = y.data();
      auto dst = trial.data();
      for (std::size_t i = 0; i < dst.size(); ++i) {
        const double v = src[i] - step * g[i];
        dst[i] = opt_cfg.clamp_domain ? std::clamp(v, -1.0, 1.0) : v;
      }
      next = objective(trial);
      if (std::isfinite(next.value) && next.value <= current.value - opt_cfg.sufficient_decrease * step * g_norm2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.stop = StopReason::line_search_failed;
      break;
    }

    const double decrease = current.value - next.value;
    const double scale = std::max(std::abs(current.value), std::numeric_limits<double>::min());
    std::swap(y, trial);
    current = std::move(next);
    result.trace.records.push_back(record(iter, current.value, step, y));
    if (decrease / scale < opt_cfg.convergence_tol) {
      result.stop = StopReason::converged;
      break;
    }
  }

  if (result.trace.records.size() > 1) {
    const bool in_range = std::all_of(y.data().begin(), y.data().end(), [](double v) { return v >= -1.0 && v <= 1.0; });
    y.set_domain(in_range ? Domain::signed_unit : Domain::raw);
  }
  result.corrected = std::move(y);
  return result;
}

}  // namespace mcorr::correction

#endif  // MCORR_CORRECTION_OPTIMIZER_HPP

#ifndef MCORR_CORRECTION_ABLATION_HPP
#define MCORR_CORRECTION_ABLATION_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/correction/optimizer.hpp"
#include "mcorr/loss/vs_ssim_loss.hpp"
#include "mcorr/metrics/metrics.hpp"
#include "mcorr/parallel.hpp"

namespace mcorr::correction {

struct AblationArm {
  std::string name;
  loss::LossConfig objective;
  CorrectionResult run;
  metrics::MetricsReport metrics;  // vs_ssim uses the arm's own patch selection
  double omega_ssim = 0.0;         // mean SSIM over the shared reference selection
};

/// Objective-level ablation: whole-image patch SSIM, VS-SSIM, and VS-SSIM
/// restricted to the mask, each optimized from the same corrupted image with
/// the same iteration budget.
struct AblationRecord {
  std::vector<AblationArm> arms;
  metrics::PatchSelection reference_selection;

  static constexpr const char* kCsvHeader = "arm,psnr_db,ssim,vs_ssim,dice,omega_ssim";

  std::string to_csv() const {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& a : arms) {
      out += a.name + "," + metrics::format_fixed(a.metrics.psnr_db) + "," + metrics::format_fixed(a.metrics.ssim) + "," +
             metrics::format_fixed(a.metrics.vs_ssim) + "," + metrics::format_fixed(a.metrics.dice) + "," +
             metrics::format_fixed(a.omega_ssim) + "\n";
    }
    return out;
  }

  const AblationArm& arm(const std::string& name) const {
    for (const auto& a : arms) {
      if (a.name == name) return a;
    }
    throw Error("no ablation arm named " + name);
  }
};

inline constexpr const char* kArmSsim = "ssim";
inline constexpr const char* kArmVsSsim = "vs_ssim";
inline constexpr const char* kArmVsSsimMask = "vs_ssim_mask";

/// The three arm objectives derived from loss_cfg. The plain arm uses rho = 1
/// and no mask; the VS-SSIM arm keeps rho and drops the mask; the masked arm
/// keeps both. loss_cfg must carry rho < 1 and a mask.
inline std::array<loss::LossConfig, 3> ablation_objectives(const loss::LossConfig& loss_cfg) {
  if (!(loss_cfg.rho < 1.0)) throw ConfigError("ablation needs rho < 1 for the VS-SSIM arms");
  if (!loss_cfg.mask) throw ConfigError("ablation needs a mask for the masked arm");
  loss::LossConfig plain = loss_cfg;
  plain.rho = 1.0;
  plain.mask.reset();
  loss::LossConfig selective = loss_cfg;
  selective.mask.reset();
  return {plain, selective, loss_cfg};
}

inline AblationRecord ablate_objectives(const Image2D& corrupted, const Image2D& gt, const loss::LossConfig& loss_cfg,
                                        const OptimizerConfig& opt_cfg) {
  const auto objectives = ablation_objectives(loss_cfg);
  const std::array<const char*, 3> names = {kArmSsim, kArmVsSsim, kArmVsSsimMask};

  AblationRecord record;
  record.reference_selection = metrics::select_patches(gt, loss_cfg.patch_size, loss_cfg.rho, std::nullopt, loss_cfg.coverage_min);
  record.arms.resize(3);
  parallel::parallel_for(3, [&](std::size_t k) {
    AblationArm& arm = record.arms[k];
    arm.name = names[k];
    arm.objective = objectives[k];
    arm.run = optimize_correction(corrupted, gt, objectives[k], opt_cfg);
    metrics::EvaluationSettings settings;
    settings.patch_size = objectives[k].patch_size;
    settings.rho = objectives[k].rho;
    settings.coverage_min = objectives[k].coverage_min;
    settings.dice_threshold = objectives[k].dice_threshold;
    settings.consts = objectives[k].consts;
    settings.mask = objectives[k].mask;
    arm.metrics = metrics::evaluate(arm.name, gt, arm.run.corrected, settings);
    arm.omega_ssim = metrics::vs_ssim(gt, arm.run.corrected, record.reference_selection, objectives[k].consts);
  });
  return record;
}

}  // namespace mcorr::correction

#endif  // MCORR_CORRECTION_ABLATION_HPP

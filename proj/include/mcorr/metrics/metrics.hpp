#ifndef MCORR_METRICS_METRICS_HPP
#define MCORR_METRICS_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>

#include "json.hpp"
#include "mcorr/image.hpp"
#include "mcorr/metrics/selection.hpp"
#include "mcorr/metrics/ssim.hpp"

namespace mcorr::metrics {

inline constexpr double kSignedUnitRange = 2.0;
inline constexpr double kDefaultDiceThreshold = -0.5;

/// 10 log10(L^2 / MSE) with L = 2; identical images give +infinity.
inline double psnr(const Image2D& a, const Image2D& b) {
  require_same_shape(a, b, "psnr");
  require_single_channel(a, "psnr");
  const auto x = a.data();
  const auto y = b.data();
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) se += (x[i] - y[i]) * (x[i] - y[i]);
  const double mse = se / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kSignedUnitRange * kSignedUnitRange / mse);
}

/// Overlap 2|A n B| / (|A| + |B|) of the thresholded foregrounds {v > threshold}.
/// Two empty foregrounds agree perfectly.
inline double dice(const Image2D& gen, const Image2D& gt, double threshold = kDefaultDiceThreshold) {
  require_same_shape(gen, gt, "dice");
  const auto a = gen.data();
  const auto b = gt.data();
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] > threshold;
    const bool in_b = b[i] > threshold;
    na += in_a;
    nb += in_b;
    both += in_a && in_b;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

struct MetricsReport {
  std::string case_id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double vs_ssim = 0.0;
  double dice = 0.0;
};

struct EvaluationSettings {
  std::size_t patch_size = kDefaultPatchSize;
  double rho = kDefaultRho;
  double coverage_min = kDefaultCoverageMin;
  double dice_threshold = kDefaultDiceThreshold;
  SsimConstants consts;
  std::optional<MaskFeatureMap> mask;
};

/// Full metric row for one (ground truth, test) pair.
inline MetricsReport evaluate(const std::string& case_id, const Image2D& gt, const Image2D& test,
                              const EvaluationSettings& settings = {}) {
  MetricsReport r;
  r.case_id = case_id;
  r.psnr_db = psnr(test, gt);
  r.ssim = ssim_global(test, gt, settings.consts);
  const auto sel = select_patches(gt, settings.patch_size, settings.rho, settings.mask, settings.coverage_min);
  r.vs_ssim = vs_ssim(gt, test, sel, settings.consts);
  r.dice = dice(test, gt, settings.dice_threshold);
  return r;
}

/// Fixed six-decimal rendering; +infinity prints as "inf".
inline std::string format_fixed(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline constexpr const char* kReportCsvHeader = "case_id,psnr_db,ssim,vs_ssim,dice";

inline std::string to_csv_row(const MetricsReport& r) {
  return r.case_id + "," + format_fixed(r.psnr_db) + "," + format_fixed(r.ssim) + "," + format_fixed(r.vs_ssim) + "," +
         format_fixed(r.dice);
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["case_id"] = r.case_id;
  if (std::isinf(r.psnr_db)) {
    j["psnr_db"] = "inf";
  } else {
    j["psnr_db"] = r.psnr_db;
  }
  j["ssim"] = r.ssim;
  j["vs_ssim"] = r.vs_ssim;
  j["dice"] = r.dice;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.case_id = j.at("case_id").get<std::string>();
  const auto& p = j.at("psnr_db");
  r.psnr_db = p.is_string() && p.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity() : p.get<double>();
  r.ssim = j.at("ssim").get<double>();
  r.vs_ssim = j.at("vs_ssim").get<double>();
  r.dice = j.at("dice").get<double>();
  return r;
}

}  // namespace mcorr::metrics

#endif  // MCORR_METRICS_METRICS_HPP

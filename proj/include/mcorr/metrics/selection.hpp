#ifndef MCORR_METRICS_SELECTION_HPP
#define MCORR_METRICS_SELECTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/metrics/ssim.hpp"
#include "mcorr/patches.hpp"

namespace mcorr::metrics {

inline constexpr std::size_t kDefaultPatchSize = 16;
inline constexpr double kDefaultRho = 0.25;

/// Variance-ranked subset of admitted patches.
///
/// `cells` lists admitted cells in ascending order and `variances[i]` is the
/// population variance of ground-truth cell `cells[i]`. `selected` holds the
/// chosen cells in rank order: descending variance, ties to the lower
/// row-major index.
struct PatchSelection {
  PatchGrid grid;
  std::vector<std::size_t> cells;
  std::vector<double> variances;
  std::vector<std::size_t> selected;
  double rho = 1.0;

  bool contains(std::size_t cell) const { return std::find(selected.begin(), selected.end(), cell) != selected.end(); }
};

/// |selection| for n admitted patches: max(1, round(rho * n)).
inline std::size_t selection_size(double rho, std::size_t admitted) {
  const auto k = static_cast<std::size_t>(std::llround(rho * static_cast<double>(admitted)));
  return std::clamp<std::size_t>(k, 1, admitted);
}

inline double patch_variance(const Image2D& img, const PatchGrid& grid, std::size_t cell) {
  const auto values = extract_patch(img, grid, cell);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return var / static_cast<double>(values.size());
}

/// Ranks admitted ground-truth patches by pixel variance and keeps the top
/// fraction rho.
inline PatchSelection select_patches(const Image2D& gt, std::size_t patch_size = kDefaultPatchSize, double rho = kDefaultRho,
                                     const std::optional<MaskFeatureMap>& mask = std::nullopt,
                                     double coverage_min = kDefaultCoverageMin) {
  require_single_channel(gt, "select_patches");
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("rho must lie in (0, 1]");
  PatchSelection sel;
  sel.rho = rho;
  sel.grid = decompose_patches(gt, patch_size, mask, coverage_min);
  sel.cells = sel.grid.admitted_cells();
  if (sel.cells.empty()) throw EmptySelectionError("no patch is admitted by the mask");
  sel.variances.reserve(sel.cells.size());
  for (auto cell : sel.cells) sel.variances.push_back(patch_variance(gt, sel.grid, cell));

  std::vector<std::size_t> order(sel.cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = selection_size(rho, order.size());
  // cells are ascending, so comparing positions breaks ties by (row, col).
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t i, std::size_t j) {
                      if (sel.variances[i] != sel.variances[j]) return sel.variances[i] > sel.variances[j];
                      return i < j;
                    });
  sel.selected.reserve(k);
  for (std::size_t i = 0; i < k; ++i) sel.selected.push_back(sel.cells[order[i]]);
  return sel;
}

/// SSIM of every selected patch, in selection order.
inline std::vector<double> selected_patch_ssims(const Image2D& gt, const Image2D& gen, const PatchSelection& sel,
                                                const SsimConstants& consts = {}) {
  require_same_shape(gt, gen, "vs_ssim");
  require_single_channel(gt, "vs_ssim");
  if (gt.width() / sel.grid.patch_size != sel.grid.cols || gt.height() / sel.grid.patch_size != sel.grid.rows) {
    throw ShapeError("vs_ssim: image does not match the selection's patch grid");
  }
  if (sel.selected.empty()) throw EmptySelectionError("selection is empty");
  std::vector<double> out;
  out.reserve(sel.selected.size());
  for (auto cell : sel.selected) {
    const auto a = extract_patch(gt, sel.grid, cell);
    const auto b = extract_patch(gen, sel.grid, cell);
    out.push_back(ssim_patch(a, b, consts));
  }
  return out;
}

/// Mean per-patch SSIM over the selected, highest-variance patches.
inline double vs_ssim(const Image2D& gt, const Image2D& gen, const PatchSelection& sel, const SsimConstants& consts = {}) {
  const auto values = selected_patch_ssims(gt, gen, sel, consts);
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace mcorr::metrics

#endif  // MCORR_METRICS_SELECTION_HPP

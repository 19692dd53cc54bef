#ifndef MCORR_PATCHES_HPP
#define MCORR_PATCHES_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"

namespace mcorr {

/// Non-overlapping square patch tiling anchored at (0, 0). Cells are indexed
/// row-major: cell = row * cols + col.
struct PatchGrid {
  std::size_t patch_size = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> admitted;

  std::size_t cell_count() const noexcept { return rows * cols; }
  std::size_t row_of(std::size_t cell) const noexcept { return cell / cols; }
  std::size_t col_of(std::size_t cell) const noexcept { return cell % cols; }
  bool is_admitted(std::size_t cell) const { return admitted[cell] != 0; }

  std::size_t admitted_count() const noexcept {
    std::size_t n = 0;
    for (auto a : admitted) n += a ? 1 : 0;
    return n;
  }

  /// Admitted cell indices in ascending order.
  std::vector<std::size_t> admitted_cells() const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < admitted.size(); ++c) {
      if (admitted[c]) out.push_back(c);
    }
    return out;
  }

  /// Pixel index of the patch's top-left corner in a width-wide plane.
  std::size_t origin_index(std::size_t cell, std::size_t width) const noexcept {
    return row_of(cell) * patch_size * width + col_of(cell) * patch_size;
  }
};

inline constexpr double kDefaultCoverageMin = 0.5;

/// Tiles img into patch_size squares, dropping trailing partial rows and
/// columns. With a mask, a cell is admitted when its foreground fraction is at
/// least coverage_min; without one every cell is admitted.
inline PatchGrid decompose_patches(const Image2D& img, std::size_t patch_size,
                                   const std::optional<MaskFeatureMap>& mask = std::nullopt,
                                   double coverage_min = kDefaultCoverageMin) {
  if (patch_size < 2) throw DomainError("patch_size must be at least 2");
  if (!(coverage_min >= 0.0 && coverage_min <= 1.0)) throw DomainError("coverage_min must lie in [0, 1]");
  if (patch_size > img.width() || patch_size > img.height()) {
    throw NoPatchesError("patch_size " + std::to_string(patch_size) + " exceeds image extent " +
                         std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  if (mask && !mask->matches(img)) throw ShapeError("mask dimensions do not match the image");

  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.rows = img.height() / patch_size;
  grid.cols = img.width() / patch_size;
  grid.admitted.assign(grid.cell_count(), 1);
  if (!mask) return grid;

  const double area = static_cast<double>(patch_size * patch_size);
  for (std::size_t cell = 0; cell < grid.cell_count(); ++cell) {
    const std::size_t x0 = grid.col_of(cell) * patch_size;
    const std::size_t y0 = grid.row_of(cell) * patch_size;
    std::size_t fg = 0;
    for (std::size_t y = y0; y < y0 + patch_size; ++y) {
      for (std::size_t x = x0; x < x0 + patch_size; ++x) fg += mask->at(x, y);
    }
    grid.admitted[cell] = static_cast<double>(fg) / area >= coverage_min ? 1 : 0;
  }
  return grid;
}

/// Copies the pixels of one patch (first channel) in row-major order.
inline std::vector<double> extract_patch(const Image2D& img, const PatchGrid& grid, std::size_t cell) {
  const std::size_t p = grid.patch_size;
  std::vector<double> out;
  out.reserve(p * p);
  const auto plane = img.channel(0);
  const std::size_t base = grid.origin_index(cell, img.width());
  for (std::size_t dy = 0; dy < p; ++dy) {
    for (std::size_t dx = 0; dx < p; ++dx) out.push_back(plane[base + dy * img.width() + dx]);
  }
  return out;
}

}  // namespace mcorr

#endif  // MCORR_PATCHES_HPP

#ifndef MCORR_MASK_SEGMENTER_HPP
#define MCORR_MASK_SEGMENTER_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/io.hpp"

namespace mcorr::mask {

struct PromptPoint {
  std::size_t x = 0;
  std::size_t y = 0;
};

/// Foreground point prompts.
struct PromptSet {
  std::vector<PromptPoint> points;

  void validate(std::size_t width, std::size_t height) const {
    if (points.empty()) throw DomainError("at least one prompt point is required");
    for (const auto& p : points) {
      if (p.x >= width || p.y >= height) {
        throw DomainError("prompt (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the image");
      }
    }
  }
};

enum class Connectivity { four = 4, eight = 8 };

struct SegmenterConfig {
  double intensity_threshold = -0.5;
  std::size_t morphology_radius = 1;
  Connectivity connectivity = Connectivity::four;

  void validate() const {
    if (!(intensity_threshold >= -1.0 && intensity_threshold <= 1.0)) {
      throw DomainError("intensity_threshold must lie in [-1, 1]");
    }
  }
};

namespace detail {

inline std::vector<std::ptrdiff_t> disk_offsets(std::size_t radius) {
  std::vector<std::ptrdiff_t> out;
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
    for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= r * r) {
        out.push_back(dx);
        out.push_back(dy);
      }
    }
  }
  return out;
}

// Dilation treats the outside as background; erosion treats it as foreground,
// which keeps closing extensive at the image border.
inline std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& in, std::size_t w, std::size_t h,
                                       std::size_t radius, bool dilate) {
  const auto offsets = disk_offsets(radius);
  std::vector<std::uint8_t> out(in.size());
  const auto sw = static_cast<std::ptrdiff_t>(w);
  const auto sh = static_cast<std::ptrdiff_t>(h);
  for (std::ptrdiff_t y = 0; y < sh; ++y) {
    for (std::ptrdiff_t x = 0; x < sw; ++x) {
      bool hit = !dilate;
      for (std::size_t k = 0; k < offsets.size(); k += 2) {
        const std::ptrdiff_t nx = x + offsets[k];
        const std::ptrdiff_t ny = y + offsets[k + 1];
        const bool inside = nx >= 0 && ny >= 0 && nx < sw && ny < sh;
        const bool v = inside ? in[static_cast<std::size_t>(ny * sw + nx)] != 0 : !dilate;
        if (dilate && v) {
          hit = true;
          break;
        }
        if (!dilate && !v) {
          hit = false;
          break;
        }
      }
      out[static_cast<std::size_t>(y * sw + x)] = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace detail

/// Morphological closing (dilate then erode) with a disk of the given radius.
inline MaskFeatureMap close_mask(const MaskFeatureMap& m, std::size_t radius) {
  if (radius == 0) return m;
  std::vector<std::uint8_t> data(m.data().begin(), m.data().end());
  data = detail::morph(data, m.width(), m.height(), radius, true);
  data = detail::morph(data, m.width(), m.height(), radius, false);
  return MaskFeatureMap(m.width(), m.height(), std::move(data));
}

/// Point-prompted region extraction: threshold at intensity_threshold
/// (foreground is v > threshold), keep the connected components that contain
/// a prompt, then close with the configured radius.
inline MaskFeatureMap segment_from_prompts(const Image2D& img, const PromptSet& prompts, const SegmenterConfig& cfg = {}) {
  require_single_channel(img, "segment_from_prompts");
  cfg.validate();
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  prompts.validate(w, h);
  const auto plane = img.channel(0);
  auto foreground = [&](std::size_t i) { return plane[i] > cfg.intensity_threshold; };

  std::vector<std::uint8_t> region(w * h, 0);
  std::vector<std::size_t> stack;
  for (const auto& p : prompts.points) {
    const std::size_t seed = p.y * w + p.x;
    if (!foreground(seed)) throw PromptMissError(p.x, p.y);
    if (region[seed]) continue;
    region[seed] = 1;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % w;
      const std::size_t y = i / w;
      auto visit = [&](std::size_t nx, std::size_t ny) {
        const std::size_t j = ny * w + nx;
        if (!region[j] && foreground(j)) {
          region[j] = 1;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(x - 1, y);
      if (x + 1 < w) visit(x + 1, y);
      if (y > 0) visit(x, y - 1);
      if (y + 1 < h) visit(x, y + 1);
      if (cfg.connectivity == Connectivity::eight) {
        if (x > 0 && y > 0) visit(x - 1, y - 1);
        if (x + 1 < w && y > 0) visit(x + 1, y - 1);
        if (x > 0 && y + 1 < h) visit(x - 1, y + 1);
        if (x + 1 < w && y + 1 < h) visit(x + 1, y + 1);
      }
    }
  }
  return close_mask(MaskFeatureMap(w, h, std::move(region)), cfg.morphology_radius);
}

struct LoadedMask {
  MaskFeatureMap mask;
  bool empty = false;  // no foreground pixel at all; callers should warn
};

/// Reads a mask produced elsewhere (P5 PGM, nonzero = foreground).
inline LoadedMask load_external_mask(const std::filesystem::path& path) {
  LoadedMask out{io::read_mask(path), false};
  out.empty = out.mask.foreground_count() == 0;
  return out;
}

}  // namespace mcorr::mask

#endif  // MCORR_MASK_SEGMENTER_HPP

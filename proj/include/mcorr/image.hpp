#ifndef MCORR_IMAGE_HPP
#define MCORR_IMAGE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcorr/error.hpp"

namespace mcorr {

/// Whether pixel values are raw intensities or windowed into [-1, 1].
enum class Domain : std::uint8_t { raw = 0, signed_unit = 1 };

inline const char* to_string(Domain d) { return d == Domain::signed_unit ? "signed_unit" : "raw"; }

/// Real-valued pixel grid with isotropic spacing. Storage is channel-planar,
/// row-major: value (x, y, c) lives at c*width*height + y*width + x.
class Image2D {
 public:
  Image2D() = default;

  /// Zero-filled image.
  Image2D(std::size_t width, std::size_t height, std::size_t channels = 1, double spacing_mm = 1.0,
          Domain domain = Domain::raw)
      : Image2D(width, height, channels, spacing_mm, domain,
                std::vector<double>(checked_size(width, height, channels), 0.0)) {}

  Image2D(std::size_t width, std::size_t height, std::size_t channels, double spacing_mm, Domain domain,
          std::vector<double> data)
      : width_(width),
        height_(height),
        channels_(channels),
        spacing_mm_(spacing_mm),
        domain_(domain),
        data_(std::move(data)) {
    if (data_.size() != checked_size(width, height, channels)) {
      throw ShapeError("image data length " + std::to_string(data_.size()) + " does not match " +
                       std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(channels));
    }
    if (!(spacing_mm > 0.0) || !std::isfinite(spacing_mm)) throw DomainError("spacing_mm must be positive");
    check_domain();
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  std::size_t size() const noexcept { return data_.size(); }
  double spacing_mm() const noexcept { return spacing_mm_; }
  Domain domain() const noexcept { return domain_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::span<const double> channel(std::size_t c) const { return data().subspan(c * pixel_count(), pixel_count()); }
  std::span<double> channel(std::size_t c) { return data().subspan(c * pixel_count(), pixel_count()); }

  double at(std::size_t x, std::size_t y, std::size_t c = 0) const { return data_[index(x, y, c)]; }
  double& at(std::size_t x, std::size_t y, std::size_t c = 0) { return data_[index(x, y, c)]; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t c = 0) const noexcept {
    return c * pixel_count() + y * width_ + x;
  }

  /// Retags the image; signed_unit requires every value to lie in [-1, 1].
  void set_domain(Domain d) {
    domain_ = d;
    check_domain();
  }

  bool same_shape(const Image2D& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  /// Exact comparison of metadata and values.
  friend bool operator==(const Image2D& a, const Image2D& b) {
    return a.same_shape(b) && a.spacing_mm_ == b.spacing_mm_ && a.domain_ == b.domain_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_size(std::size_t w, std::size_t h, std::size_t c) {
    if (w == 0 || h == 0 || c == 0) throw ShapeError("image dimensions must be positive");
    const std::size_t limit = std::numeric_limits<std::size_t>::max() / sizeof(double);
    if (w > limit / h || w * h > limit / c) throw ShapeError("image dimensions overflow");
    return w * h * c;
  }

  void check_domain() const {
    if (domain_ != Domain::signed_unit) return;
    for (double v : data_) {
      if (!(v >= -1.0 && v <= 1.0)) throw DomainError("signed_unit image holds a value outside [-1, 1]");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  double spacing_mm_ = 1.0;
  Domain domain_ = Domain::raw;
  std::vector<double> data_;
};

/// Strictly binary foreground mask.
class MaskFeatureMap {
 public:
  MaskFeatureMap() = default;

  MaskFeatureMap(std::size_t width, std::size_t height) : MaskFeatureMap(width, height, std::vector<std::uint8_t>(width * height, 0)) {}

  MaskFeatureMap(std::size_t width, std::size_t height, std::vector<std::uint8_t> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width == 0 || height == 0) throw ShapeError("mask dimensions must be positive");
    if (data_.size() != width * height) throw ShapeError("mask data length does not match its dimensions");
    for (auto v : data_) {
      if (v > 1) throw DomainError("mask values must be exactly 0 or 1");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const std::uint8_t> data() const noexcept { return data_; }

  std::uint8_t at(std::size_t x, std::size_t y) const { return data_[y * width_ + x]; }
  void set(std::size_t x, std::size_t y, bool foreground) { data_[y * width_ + x] = foreground ? 1 : 0; }

  std::size_t foreground_count() const noexcept {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
  }

  bool matches(const Image2D& img) const noexcept { return width_ == img.width() && height_ == img.height(); }

  friend bool operator==(const MaskFeatureMap&, const MaskFeatureMap&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Affine window [lo, hi] -> [-1, 1], values outside the window saturate.
inline Image2D normalize_to_signed_unit(const Image2D& img, double window_lo, double window_hi) {
  if (!(window_hi > window_lo) || !std::isfinite(window_lo) || !std::isfinite(window_hi)) {
    throw InvalidWindowError("normalization window requires hi > lo");
  }
  const double scale = 2.0 / (window_hi - window_lo);
  std::vector<double> out(img.size());
  auto in = img.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(scale * (in[i] - window_lo) - 1.0, -1.0, 1.0);
  }
  return Image2D(img.width(), img.height(), img.channels(), img.spacing_mm(), Domain::signed_unit, std::move(out));
}

/// Appends the mask as one more channel, remapped {0, 1} -> {-1, +1}.
inline Image2D concat_channels(const Image2D& img, const MaskFeatureMap& mask) {
  if (!mask.matches(img)) {
    throw ShapeError("mask is " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()) +
                     " but image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  if (img.domain() != Domain::signed_unit) throw DomainError("concat_channels expects a signed_unit image");
  std::vector<double> out(img.data().begin(), img.data().end());
  out.reserve(img.size() + img.pixel_count());
  for (auto v : mask.data()) out.push_back(v ? 1.0 : -1.0);
  return Image2D(img.width(), img.height(), img.channels() + 1, img.spacing_mm(), Domain::signed_unit, std::move(out));
}

inline void require_same_shape(const Image2D& a, const Image2D& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                     "x" + std::to_string(a.channels()) + " vs " + std::to_string(b.width()) + "x" +
                     std::to_string(b.height()) + "x" + std::to_string(b.channels()));
  }
}

inline void require_single_channel(const Image2D& a, const char* what) {
  if (a.channels() != 1) throw ShapeError(std::string(what) + " expects a single-channel image");
}

}  // namespace mcorr

#endif  // MCORR_IMAGE_HPP

#ifndef MCORR_IO_HPP
#define MCORR_IO_HPP

// IMG2D container:
//   "I2DF" | u32 width | u32 height | u32 channels | u8 domain | 3 pad | f32 spacing_mm
//   then width*height*channels f32 samples, channel-planar, row-major.
// All integers and floats are little-endian. Pixels are stored as f32, so a
// write/read round trip is exact for every value representable in f32.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"

namespace mcorr::io {

inline constexpr std::size_t kImg2dHeaderBytes = 24;
inline constexpr std::uint32_t kMaxDimension = 1u << 16;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

inline std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

inline float get_f32(const std::vector<std::uint8_t>& in, std::size_t at) { return std::bit_cast<float>(get_u32(in, at)); }

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string() + " for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

// Minimal PNM header tokenizer: whitespace separated, '#' comments to end of line.
class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t position() const noexcept { return pos_; }

  std::string token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_])) ++pos_;
    if (start == pos_) throw FormatError("unexpected end of PGM header", pos_);
    return std::string(bytes_.begin() + static_cast<std::ptrdiff_t>(start), bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

  std::uint32_t number(std::uint32_t max_value) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    const std::string t = token();
    std::uint64_t v = 0;
    for (char ch : t) {
      if (ch < '0' || ch > '9') throw FormatError("non-numeric PGM header field", start);
      v = v * 10 + static_cast<std::uint64_t>(ch - '0');
      if (v > max_value) throw FormatError("PGM header field out of range", start);
    }
    return static_cast<std::uint32_t>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_header() {
    if (pos_ >= bytes_.size() || !is_space(bytes_[pos_])) throw FormatError("missing whitespace after PGM header", pos_);
    ++pos_;
  }

 private:
  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

struct PgmRaster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t maxval = 0;
  std::vector<std::uint16_t> samples;
};

inline PgmRaster decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("bad PGM magic, expected P5", 0);
  PnmReader reader(bytes);
  reader.token();
  PgmRaster r;
  r.width = reader.number(kMaxDimension);
  r.height = reader.number(kMaxDimension);
  r.maxval = reader.number(65535);
  if (r.width == 0 || r.height == 0) throw FormatError("PGM dimensions must be positive", reader.position());
  if (r.maxval == 0) throw FormatError("PGM maxval must be positive", reader.position());
  reader.end_header();
  const std::size_t data_at = reader.position();
  const std::size_t bytes_per_sample = r.maxval < 256 ? 1 : 2;
  const std::size_t count = static_cast<std::size_t>(r.width) * r.height;
  if (bytes.size() - data_at < count * bytes_per_sample) throw FormatError("truncated PGM raster", bytes.size());
  r.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = data_at + i * bytes_per_sample;
    r.samples[i] = bytes_per_sample == 1 ? bytes[at] : static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
  }
  return r;
}

inline std::vector<std::uint8_t> pgm_header(std::size_t width, std::size_t height, unsigned maxval) {
  const std::string h = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n" + std::to_string(maxval) + "\n";
  return std::vector<std::uint8_t>(h.begin(), h.end());
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_image(const Image2D& img) {
  if (img.width() > kMaxDimension || img.height() > kMaxDimension || img.channels() > kMaxDimension) {
    throw FormatError("image too large for IMG2D", 4);
  }
  std::vector<std::uint8_t> out;
  out.reserve(kImg2dHeaderBytes + 4 * img.size());
  for (char c : {'I', '2', 'D', 'F'}) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(out, static_cast<std::uint32_t>(img.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(img.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(img.channels()));
  out.push_back(static_cast<std::uint8_t>(img.domain()));
  out.insert(out.end(), 3, 0);
  detail::put_f32(out, static_cast<float>(img.spacing_mm()));
  for (double v : img.data()) detail::put_f32(out, static_cast<float>(v));
  return out;
}

inline Image2D decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "I2DF")) {
    throw FormatError("bad IMG2D magic, expected I2DF", 0);
  }
  if (bytes.size() < kImg2dHeaderBytes) throw FormatError("truncated IMG2D header", bytes.size());
  const std::uint32_t w = detail::get_u32(bytes, 4);
  const std::uint32_t h = detail::get_u32(bytes, 8);
  const std::uint32_t c = detail::get_u32(bytes, 12);
  if (w == 0 || w > kMaxDimension) throw FormatError("IMG2D width out of range", 4);
  if (h == 0 || h > kMaxDimension) throw FormatError("IMG2D height out of range", 8);
  if (c == 0 || c > kMaxDimension) throw FormatError("IMG2D channel count out of range", 12);
  const std::uint8_t tag = bytes[16];
  if (tag > 1) throw FormatError("unknown IMG2D domain tag " + std::to_string(tag), 16);
  const float spacing = detail::get_f32(bytes, 20);
  if (!(spacing > 0.0f) || !std::isfinite(spacing)) throw FormatError("IMG2D spacing must be positive", 20);

  const std::uint64_t count = static_cast<std::uint64_t>(w) * h * c;
  const std::uint64_t need = kImg2dHeaderBytes + 4 * count;
  if (count > std::numeric_limits<std::size_t>::max() / 8) throw FormatError("IMG2D dimensions overflow", 4);
  if (bytes.size() < need) throw FormatError("truncated IMG2D payload", bytes.size());
  if (bytes.size() > need) throw FormatError("trailing bytes after IMG2D payload", static_cast<std::size_t>(need));

  std::vector<double> data(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = detail::get_f32(bytes, kImg2dHeaderBytes + 4 * i);
  const auto domain = static_cast<Domain>(tag);
  if (domain == Domain::signed_unit) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!(data[i] >= -1.0 && data[i] <= 1.0)) {
        throw FormatError("signed_unit sample outside [-1, 1]", kImg2dHeaderBytes + 4 * i);
      }
    }
  }
  return Image2D(w, h, c, static_cast<double>(spacing), domain, std::move(data));
}

inline void write_image(const Image2D& img, const std::filesystem::path& path) { detail::write_file(path, encode_image(img)); }

inline Image2D read_image(const std::filesystem::path& path) { return decode_image(detail::read_file(path)); }

/// Binary PGM with 0/255 samples.
inline std::vector<std::uint8_t> encode_mask(const MaskFeatureMap& mask) {
  auto out = detail::pgm_header(mask.width(), mask.height(), 255);
  for (auto v : mask.data()) out.push_back(v ? 255 : 0);
  return out;
}

/// Any nonzero sample is foreground.
inline MaskFeatureMap decode_mask(const std::vector<std::uint8_t>& bytes) {
  auto raster = detail::decode_pgm(bytes);
  std::vector<std::uint8_t> data(raster.samples.size());
  std::transform(raster.samples.begin(), raster.samples.end(), data.begin(),
                 [](std::uint16_t s) { return static_cast<std::uint8_t>(s != 0); });
  return MaskFeatureMap(raster.width, raster.height, std::move(data));
}

inline void write_mask(const MaskFeatureMap& mask, const std::filesystem::path& path) {
  detail::write_file(path, encode_mask(mask));
}

inline MaskFeatureMap read_mask(const std::filesystem::path& path) { return decode_mask(detail::read_file(path)); }

/// 16-bit preview of one channel. signed_unit maps [-1, 1] onto [0, 65535];
/// raw images map their own [min, max] (a constant image exports as zeros).
inline std::vector<std::uint8_t> encode_preview(const Image2D& img, std::size_t channel = 0) {
  const auto plane = img.channel(channel);
  double lo = -1.0;
  double hi = 1.0;
  if (img.domain() == Domain::raw) {
    const auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
    lo = *mn;
    hi = *mx;
  }
  auto out = detail::pgm_header(img.width(), img.height(), 65535);
  out.reserve(out.size() + 2 * plane.size());
  for (double v : plane) {
    double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const auto s = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xff));
  }
  return out;
}

inline void write_preview(const Image2D& img, const std::filesystem::path& path, std::size_t channel = 0) {
  detail::write_file(path, encode_preview(img, channel));
}

/// Raw 16-bit samples of a P5 file with maxval > 255, for inspection.
inline std::vector<std::uint16_t> read_preview_samples(const std::filesystem::path& path) {
  return detail::decode_pgm(detail::read_file(path)).samples;
}

}  // namespace mcorr::io

#endif  // MCORR_IO_HPP

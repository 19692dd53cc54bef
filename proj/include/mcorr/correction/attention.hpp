#ifndef MCORR_CORRECTION_ATTENTION_HPP
#define MCORR_CORRECTION_ATTENTION_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"

namespace mcorr::correction {

/// Attention-guided blend: content * attention + base * (1 - attention),
/// elementwise. The result is kept inside [min(content, base), max(content, base)]
/// so rounding cannot leave the convex hull of the two inputs.
inline Image2D attention_compose(const Image2D& content, const Image2D& attention, const Image2D& base) {
  require_same_shape(content, attention, "attention_compose");
  require_same_shape(content, base, "attention_compose");
  const auto c = content.data();
  const auto a = attention.data();
  const auto b = base.data();
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(a[i] >= 0.0 && a[i] <= 1.0)) throw DomainError("attention values must lie in [0, 1]");
    const double v = c[i] * a[i] + b[i] * (1.0 - a[i]);
    out[i] = std::clamp(v, std::min(c[i], b[i]), std::max(c[i], b[i]));
  }
  const Domain d =
      content.domain() == Domain::signed_unit && base.domain() == Domain::signed_unit ? Domain::signed_unit : Domain::raw;
  return Image2D(content.width(), content.height(), content.channels(), content.spacing_mm(), d, std::move(out));
}

}  // namespace mcorr::correction

#endif  // MCORR_CORRECTION_ATTENTION_HPP

#ifndef MCORR_LOSS_GRADCHECK_HPP
#define MCORR_LOSS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcorr/error.hpp"
#include "mcorr/image.hpp"
#include "mcorr/loss/total.hpp"
#include "mcorr/random.hpp"

namespace mcorr::loss {

struct GradientProbe {
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

struct FiniteDiffResult {
  double max_relative_error = 0.0;
  std::vector<GradientProbe> probes;  // every probed entry, in probe order
};

/// Compares the analytic gradient of `loss` at `point` with central
/// differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) on n_probes
/// distinct seeded pixels. The relative error of a probe is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8). With top_k > 0
/// only the top_k probes of largest gradient magnitude enter the maximum.
inline FiniteDiffResult finite_diff_check(const Regularizer& loss, const Image2D& point, double epsilon,
                                          std::size_t n_probes, std::uint64_t seed, std::size_t top_k = 0) {
  if (!(epsilon > 0.0)) throw DomainError("finite-difference epsilon must be positive");
  const LossValueGrad base = loss(point);
  if (!std::isfinite(base.value)) throw NumericError("loss is not finite at the probe point");

  // Partial Fisher-Yates draw of distinct pixel indices.
  std::vector<std::size_t> pool(point.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  const std::size_t n = std::min(n_probes, pool.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);

  FiniteDiffResult result;
  Image2D probe = point;
  auto values = probe.data();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = pool[k];
    const double saved = values[i];
    values[i] = saved + epsilon;
    const double up = loss(probe).value;
    values[i] = saved - epsilon;
    const double down = loss(probe).value;
    values[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("loss is not finite near the probe point");
    GradientProbe p;
    p.index = i;
    p.analytic = base.grad.data()[i];
    p.numeric = (up - down) / (2.0 * epsilon);
    p.relative_error = std::abs(p.analytic - p.numeric) / std::max({std::abs(p.analytic), std::abs(p.numeric), 1e-8});
    result.probes.push_back(p);
  }

  std::vector<std::size_t> order(result.probes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto magnitude = [&](std::size_t j) {
    return std::max(std::abs(result.probes[j].analytic), std::abs(result.probes[j].numeric));
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return magnitude(a) > magnitude(b); });
  const std::size_t considered = top_k == 0 ? order.size() : std::min(top_k, order.size());
  for (std::size_t j = 0; j < considered; ++j) {
    result.max_relative_error = std::max(result.max_relative_error, result.probes[order[j]].relative_error);
  }
  return result;
}

}  // namespace mcorr::loss

#endif  // MCORR_LOSS_GRADCHECK_HPP

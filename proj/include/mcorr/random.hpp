#ifndef MCORR_RANDOM_HPP
#define MCORR_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace mcorr {

/// Seeded generator with platform-independent output. The standard
/// distributions are implementation-defined, so draws are mapped by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform in [0, n). n must be positive.
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcorr

#endif  // MCORR_RANDOM_HPP

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace nbi {

/// Seeded generator with platform-independent derived draws.
///
/// std::uniform_int_distribution and std::shuffle are implementation-defined,
/// so fold plans and sampling orders would differ between standard libraries.
/// Everything here is built on the raw mt19937_64 stream, which is fully
/// specified by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool coin() { return (engine_() >> 63) != 0; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent child stream, e.g. one per worker or per fold.
  Rng fork(std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

}  // namespace nbi

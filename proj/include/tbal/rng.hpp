#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tbal {

struct RngSeed {
  std::uint64_t value = 0;
};

// Counter-based generator: output i is a pure function of (key, i), so a
// stream can be re-derived anywhere from its seed and a stream label.
// Every stochastic step in the library draws from an Rng derived this way.
class Rng {
 public:
  explicit Rng(RngSeed seed) noexcept;

  // Independent child stream keyed by a label and an index (e.g. round).
  Rng derive(std::string_view label, std::uint64_t index = 0) const noexcept;

  std::uint64_t next_u64() noexcept;
  // Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Standard normal via Box-Muller.
  double normal() noexcept;
  // Uniform in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct positions out of [0, n), in draw order.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  Rng(std::uint64_t key, int) noexcept : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace tbal

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace motrl {

// Seeded generator whose derived draws are identical on every standard
// library: only the engine (fully specified) comes from <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 bits.
  double uniform();

  // Uniform integer in [0, bound), rejection-sampled. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a; used to derive per-item seeds from a global seed and an item key.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

}  // namespace motrl

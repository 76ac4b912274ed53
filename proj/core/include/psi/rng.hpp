#pragma once

#include <cstdint>
#include <random>

namespace psi {

// splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Child seed for stream `index` of `seed`; distinct indices give
// statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

// All synthetic randomness flows through this engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace psi

#ifndef MICE_RNG_H_
#define MICE_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace mice {

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t Mix64(std::uint64_t x);

// Derives an independent seed for a named substream ("split", "init",
// "dropout", "shuffle", ...) from the single experiment seed.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream);
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0);

// Thin wrapper around std::mt19937_64. The engine's output sequence is fixed
// by the standard; the distributions here are implemented locally because the
// std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t Below(std::uint64_t n);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mice

#endif  // MICE_RNG_H_

#pragma once

#include <cmath>
#include <cstdint>

namespace pyr {

// SplitMix64. Chosen over std::mt19937_64 because output must be
// byte-identical across platforms, including the variate transforms below,
// and because forking a child stream from (seed, key) is a single mix.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Child generator keyed by (current state, key). Does not advance the
  // parent, so forking the same keys from a fresh master is reproducible.
  Rng fork(std::uint64_t key) const {
    Rng mixer(seed_mix(state0(), key));
    return Rng(mixer.next_u64());
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double mean) {
    return -mean * std::log1p(-uniform());
  }

  double normal() {
    // Box-Muller, one variate per call.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

 private:
  std::uint64_t state_;

  std::uint64_t state0() const { return state_; }

  static std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  }
};

// Deterministic Fisher-Yates shuffle over indices [0, n).
template <typename Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace pyr

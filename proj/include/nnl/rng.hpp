#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace nnl {

/// Deterministic 64-bit generator: xoshiro256** whose state is filled from
/// the seed by four rounds of splitmix64. Every stochastic component of the
/// library draws from this generator, so identical seeds give identical
/// streams on every platform.
///
/// Derived draws:
///   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   index(n)   = rejection-sampled next() % n, unbiased
///   normal()   = Box-Muller on (1 - uniform(), uniform()), the sine branch
///                cached for the following call
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  std::size_t index(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p_true) { return uniform() < p_true; }

  /// Fisher-Yates, walking from the back.
  void shuffle(std::vector<std::size_t>& items);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; used to derive independent seeds (per epoch, per restart).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nnl

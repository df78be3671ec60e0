#ifndef PAIRSHAP_RANDOM_HPP
#define PAIRSHAP_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace pairshap {

// Counter-based seed derivation: folds a path of integers (replicate id,
// attempt number, ...) into a master seed with the SplitMix64 finalizer, so
// every replicate owns a substream that does not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// The generator family is std::mt19937_64, whose output sequence is fixed by
// the standard. The distributions below are written out by hand because the
// std:: distributions are implementation-defined, which would break
// byte-identical output across toolchains.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform integer on [0, bound); unbiased (Lemire's rejection method).
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pairshap

#endif  // PAIRSHAP_RANDOM_HPP

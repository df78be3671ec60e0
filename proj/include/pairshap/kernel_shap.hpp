#ifndef PAIRSHAP_KERNEL_SHAP_HPP
#define PAIRSHAP_KERNEL_SHAP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pairshap/exact.hpp"
#include "pairshap/linalg.hpp"
#include "pairshap/random.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {

inline constexpr int kMaxRankRedraws = 100;
inline constexpr double kDesignRankTol = 1e-10;

// Draws |C| = s with probability proportional to 1/(s(q-s)), then a uniform
// subset of that size.
Coalition sample_coalition(const KernelWeights& weights, Rng& rng);

// The sampled regression problem. Paired batches interleave rows: row 2i is
// draw i, row 2i+1 its complement. n counts draws (pairs when paired).
struct KernelSampleBatch {
  std::vector<Coalition> draws;
  bool paired = false;
  linalg::Matrix design;           // rows Z~ - Z_q 1~
  std::vector<double> response;    // nu(Z) - Z_q nu(1)
  std::uint64_t seed = 0;
  int retries = 0;                 // rank-deficient batches discarded

  std::size_t n() const { return draws.size(); }
};

struct KernelEstimate {
  ShapleyVector phi;
  KernelSampleBatch batch;
};

// Sampling (or paired-sampling) KernelSHAP with n draws. A rank-deficient
// design is redrawn in full from the next substream of `seed`; after
// kMaxRankRedraws attempts RankDeficient is thrown.
KernelEstimate estimate_kernel(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed);

// Paired solve on q-1 given coalitions and their complements. Exact for
// bilinear games. Throws RankDeficient if the coalitions are dependent.
ShapleyVector solve_bilinear_basis(const GameEvaluator& game, std::span<const Coalition> basis);

// Draws q-1 coalitions whose paired design has full rank.
std::vector<Coalition> random_independent_basis(int q, Rng& rng);

struct BilinearityVerdict {
  bool consistent = false;
  double max_discrepancy = 0.0;  // largest pairwise sup-norm distance
  int trials = 0;
};

// Runs solve_bilinear_basis on `trials` random bases; consistent iff all
// pairwise outputs agree within tol.
BilinearityVerdict bilinearity_test(const GameEvaluator& game, int trials, double tol, std::uint64_t seed);

}  // namespace pairshap

#endif  // PAIRSHAP_KERNEL_SHAP_HPP

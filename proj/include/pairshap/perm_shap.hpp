#ifndef PAIRSHAP_PERM_SHAP_HPP
#define PAIRSHAP_PERM_SHAP_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pairshap/coalition.hpp"
#include "pairshap/exact.hpp"
#include "pairshap/random.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {

// b_j = nu(C_{pi,j} + j) - nu(C_{pi,j}) for one ordering pi.
struct MarginalVector {
  std::vector<double> b;
};

// One walk of the prefix chain. nu(empty) = 0 is known, so the walk costs q
// evaluations.
MarginalVector marginal_vector(const GameEvaluator& game, const Permutation& pi);

// Uniform ordering by Fisher-Yates.
Permutation sample_permutation(int q, Rng& rng);

// Visits the n per-draw vectors of the permutation estimator: B_pi for
// unpaired draws, (B_pi + B_rho(pi)) / 2 for paired ones. The estimator and
// the plug-in covariance both consume this stream, so the same seed yields
// the same orderings.
void for_each_permutation_sample(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed,
                                 const std::function<void(std::span<const double>)>& visit);

// Sampling (or paired-sampling) PermutationSHAP over n orderings.
ShapleyVector estimate_permutation(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed);

// Paired estimate from a single ordering pi and its reverse.
ShapleyVector paired_single_permutation(const GameEvaluator& game, const Permutation& pi);

// Disjoint 0-based player groups covering {0, ..., q-1}.
using Partition = std::vector<std::vector<int>>;

// Throws PartitionError on overlap, gap, empty group or out-of-range index.
void validate_partition(const Partition& partition, int q);

std::vector<double> group_sums(const ShapleyVector& phi, const Partition& partition);

// Finest partition such that every term reads players from a single group.
Partition term_partition(const ValueFunctionSpec& spec);

// Closed-form Shapley values of players 0..d-1 when they carry only
// linear/bilinear terms that touch no other player. Throws SpecError when
// the term index sets violate that separation.
std::vector<double> bilinear_block_shapley(const ValueFunctionSpec& spec, int d);

// First d paired single-permutation estimates for a game whose spec
// separates a bilinear block on players 0..d-1 from everything else.
std::vector<double> separated_exact_check(const GameEvaluator& game, int d, const Permutation& pi);

}  // namespace pairshap

#endif  // PAIRSHAP_PERM_SHAP_HPP

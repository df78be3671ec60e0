#ifndef PAIRSHAP_EXACT_HPP
#define PAIRSHAP_EXACT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "pairshap/coalition.hpp"
#include "pairshap/linalg.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {

// Enumeration caps.
inline constexpr int kMaxSubsetPlayers = 25;      // 2^q coalitions
inline constexpr int kMaxPermutationPlayers = 9;  // q! orderings

enum class Representation {
  subset,
  permutation,
  kernel,
  kernel_sampled,
  kernel_paired_sampled,
  permutation_sampled,
  permutation_paired_sampled,
  bilinear_basis,
};

const char* to_string(Representation r);

// Shapley attribution phi_1..phi_q. The non-distributed payoff phi_0 is
// always 0 because games are normalized to nu(empty) = 0.
struct ShapleyVector {
  std::vector<double> phi;
  Representation method = Representation::subset;

  int q() const { return static_cast<int>(phi.size()); }
  double total() const;
};

// max_j |a_j - b_j|
double max_discrepancy(const ShapleyVector& a, const ShapleyVector& b);

// Binomial coefficient by multiplicative recurrence, in floating point.
double binomial(int n, int k);

// KernelSHAP probability weights over nonempty proper coalitions:
// p(C) proportional to (q-1) / (C(q,|C|) |C| (q-|C|)).
class KernelWeights {
 public:
  explicit KernelWeights(int q);

  int q() const { return q_; }
  // Sum over nonempty proper C of (q-1) / (C(q,|C|) |C| (q-|C|)).
  double normalizer() const { return normalizer_; }
  // Probability that a draw has size s, proportional to 1 / (s (q-s)).
  double size_probability(int s) const;
  // p(C) for any single coalition of size s; 0 for s = 0 or s = q.
  double coalition_probability(int s) const;
  double probability(const Coalition& c) const { return coalition_probability(c.size()); }
  // Entries for s = 1..q-1.
  std::span<const double> size_probabilities() const { return size_mass_; }

 private:
  int q_;
  double normalizer_;
  std::vector<double> size_mass_;
  std::vector<double> per_coalition_;
};

KernelWeights kernel_weights(int q);

// nu over all 2^q coalitions, indexed by player bitmask. Building it costs
// exactly 2^q evaluations (the empty coalition included).
class CoalitionTable {
 public:
  // Throws SizeGuard when q > kMaxSubsetPlayers.
  explicit CoalitionTable(const GameEvaluator& game);

  int q() const { return q_; }
  double operator[](std::uint64_t mask) const { return values_[mask]; }
  double grand() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

 private:
  int q_;
  std::vector<double> values_;
};

// Kernel regression row for coalition Z: x = Z~ - Z_q 1~ (q-1 entries).
void kernel_regressor(const Coalition& z, std::span<double> x);
void kernel_regressor(int q, std::uint64_t mask, std::span<double> x);

// Population moments of the kernel regression, by enumeration:
// hessian = E_p[x x'], score = E_p[(nu(Z) - Z_q nu(1)) x].
struct KernelMoments {
  linalg::Matrix hessian;
  linalg::Vector score;
};
KernelMoments kernel_moments(const CoalitionTable& table);

// Subset formula.
ShapleyVector shapley_subset(const GameEvaluator& game);
ShapleyVector shapley_subset(const CoalitionTable& table);

// Average marginal contribution over all q! orderings. Throws SizeGuard for
// q > kMaxPermutationPlayers.
ShapleyVector shapley_all_permutations(const GameEvaluator& game);
ShapleyVector shapley_all_permutations(const CoalitionTable& table);

// Exact constrained weighted least squares with player q as the pivot
// eliminated through efficiency.
ShapleyVector shapley_kernel_exact(const GameEvaluator& game);
ShapleyVector shapley_kernel_exact(const CoalitionTable& table);

}  // namespace pairshap

#endif  // PAIRSHAP_EXACT_HPP

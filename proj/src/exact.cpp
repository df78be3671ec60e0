#include "pairshap/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "pairshap/errors.hpp"

namespace pairshap {

const char* to_string(Representation r) {
  switch (r) {
    case Representation::subset: return "subset";
    case Representation::permutation: return "permutation";
    case Representation::kernel: return "kernel";
    case Representation::kernel_sampled: return "kernel-sampled";
    case Representation::kernel_paired_sampled: return "kernel-paired-sampled";
    case Representation::permutation_sampled: return "permutation-sampled";
    case Representation::permutation_paired_sampled: return "permutation-paired-sampled";
    case Representation::bilinear_basis: return "bilinear-basis";
  }
  return "?";
}

double ShapleyVector::total() const { return std::accumulate(phi.begin(), phi.end(), 0.0); }

double max_discrepancy(const ShapleyVector& a, const ShapleyVector& b) {
  if (a.phi.size() != b.phi.size()) throw DimensionError("Shapley vectors differ in length");
  double m = 0.0;
  for (std::size_t j = 0; j < a.phi.size(); ++j) m = std::max(m, std::abs(a.phi[j] - b.phi[j]));
  return m;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

KernelWeights::KernelWeights(int q) : q_(q) {
  if (q < 2) throw DomainError("kernel weights need q >= 2");
  size_mass_.resize(q - 1);
  per_coalition_.resize(q + 1, 0.0);
  double inv_sum = 0.0;
  for (int s = 1; s < q; ++s) inv_sum += 1.0 / (static_cast<double>(s) * (q - s));
  normalizer_ = (q - 1) * inv_sum;
  for (int s = 1; s < q; ++s) {
    size_mass_[s - 1] = 1.0 / (static_cast<double>(s) * (q - s)) / inv_sum;
    per_coalition_[s] = (q - 1) / (binomial(q, s) * s * (q - s)) / normalizer_;
  }
}

double KernelWeights::size_probability(int s) const {
  return (s >= 1 && s < q_) ? size_mass_[s - 1] : 0.0;
}

double KernelWeights::coalition_probability(int s) const {
  return (s >= 1 && s < q_) ? per_coalition_[s] : 0.0;
}

KernelWeights kernel_weights(int q) { return KernelWeights(q); }

CoalitionTable::CoalitionTable(const GameEvaluator& game) : q_(game.q()) {
  if (q_ > kMaxSubsetPlayers)
    throw SizeGuard("exact enumeration supports q <= " + std::to_string(kMaxSubsetPlayers) + ", got " +
                    std::to_string(q_));
  const std::uint64_t count = std::uint64_t{1} << q_;
  values_.resize(count);
  Coalition z(q_);
  // Gray-code walk: one bit changes per step, so the coalition is updated in place.
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t gray = i ^ (i >> 1);
    if (i > 0) {
      const int flipped = std::countr_zero(i);
      z.set(flipped, !z.contains(flipped));
    }
    values_[gray] = game.evaluate(z);
  }
}

void kernel_regressor(const Coalition& z, std::span<double> x) {
  const int q = z.q();
  const double last = z[q - 1];
  for (int j = 0; j + 1 < q; ++j) x[j] = z[j] - last;
}

void kernel_regressor(int q, std::uint64_t mask, std::span<double> x) {
  const double last = static_cast<double>((mask >> (q - 1)) & 1u);
  for (int j = 0; j + 1 < q; ++j) x[j] = static_cast<double>((mask >> j) & 1u) - last;
}

KernelMoments kernel_moments(const CoalitionTable& table) {
  const int q = table.q();
  const KernelWeights weights(q);
  const double grand = table.grand();
  KernelMoments m{linalg::Matrix(q - 1, q - 1), linalg::Vector(q - 1, 0.0)};
  std::vector<double> x(q - 1);
  const std::uint64_t full = (std::uint64_t{1} << q) - 1;
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    const double p = weights.coalition_probability(std::popcount(mask));
    kernel_regressor(q, mask, x);
    const double y = table[mask] - static_cast<double>((mask >> (q - 1)) & 1u) * grand;
    linalg::add_outer(m.hessian, x, p);
    for (int j = 0; j + 1 < q; ++j) m.score[j] += p * y * x[j];
  }
  return m;
}

ShapleyVector shapley_subset(const GameEvaluator& game) { return shapley_subset(CoalitionTable(game)); }

ShapleyVector shapley_subset(const CoalitionTable& table) {
  const int q = table.q();
  std::vector<double> weight(q);
  for (int s = 0; s < q; ++s) weight[s] = 1.0 / (q * binomial(q - 1, s));
  ShapleyVector out{std::vector<double>(q, 0.0), Representation::subset};
  const std::uint64_t count = std::uint64_t{1} << q;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const double w = weight[std::min(std::popcount(mask), q - 1)];
    const double base = table[mask];
    for (int j = 0; j < q; ++j) {
      const std::uint64_t bit = std::uint64_t{1} << j;
      if (mask & bit) continue;
      out.phi[j] += w * (table[mask | bit] - base);
    }
  }
  return out;
}

ShapleyVector shapley_all_permutations(const GameEvaluator& game) {
  if (game.q() > kMaxPermutationPlayers)
    throw SizeGuard("permutation enumeration supports q <= " + std::to_string(kMaxPermutationPlayers) +
                    ", got " + std::to_string(game.q()));
  return shapley_all_permutations(CoalitionTable(game));
}

ShapleyVector shapley_all_permutations(const CoalitionTable& table) {
  const int q = table.q();
  if (q > kMaxPermutationPlayers)
    throw SizeGuard("permutation enumeration supports q <= " + std::to_string(kMaxPermutationPlayers) +
                    ", got " + std::to_string(q));
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sum(q, 0.0);
  double count = 0.0;
  do {
    std::uint64_t mask = 0;
    double prev = 0.0;
    for (int player : order) {
      mask |= std::uint64_t{1} << player;
      const double v = table[mask];
      sum[player] += v - prev;
      prev = v;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  ShapleyVector out{std::move(sum), Representation::permutation};
  for (double& v : out.phi) v /= count;
  return out;
}

ShapleyVector shapley_kernel_exact(const GameEvaluator& game) { return shapley_kernel_exact(CoalitionTable(game)); }

ShapleyVector shapley_kernel_exact(const CoalitionTable& table) {
  const int q = table.q();
  const KernelMoments m = kernel_moments(table);
  linalg::Vector head = linalg::solve_spd(m.hessian, m.score);
  ShapleyVector out{std::vector<double>(q), Representation::kernel};
  std::copy(head.begin(), head.end(), out.phi.begin());
  out.phi[q - 1] = table.grand() - std::accumulate(head.begin(), head.end(), 0.0);
  return out;
}

}  // namespace pairshap

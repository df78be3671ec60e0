#include "pairshap/perm_shap.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pairshap/errors.hpp"

namespace pairshap {

MarginalVector marginal_vector(const GameEvaluator& game, const Permutation& pi) {
  const int q = game.q();
  if (pi.q() != q) throw DimensionError("permutation and game differ in q");
  MarginalVector out{std::vector<double>(q, 0.0)};
  Coalition z(q);
  double prev = 0.0;
  for (int i = 0; i < q; ++i) {
    z.set(pi[i]);
    const double v = game.evaluate(z);
    out.b[pi[i]] = v - prev;
    prev = v;
  }
  return out;
}

Permutation sample_permutation(int q, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  for (int i = q - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  return Permutation(std::move(order));
}

void for_each_permutation_sample(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed,
                                 const std::function<void(std::span<const double>)>& visit) {
  const int q = game.q();
  Rng rng(derive_seed(seed, {0}));
  std::vector<double> h(q);
  for (std::size_t i = 0; i < n; ++i) {
    const Permutation pi = sample_permutation(q, rng);
    const MarginalVector b = marginal_vector(game, pi);
    if (paired) {
      const MarginalVector br = marginal_vector(game, pi.reversed());
      for (int j = 0; j < q; ++j) h[j] = 0.5 * (b.b[j] + br.b[j]);
    } else {
      h = b.b;
    }
    visit(h);
  }
}

ShapleyVector estimate_permutation(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed) {
  if (n < 1) throw DomainError("permutation estimation needs n >= 1");
  const int q = game.q();
  ShapleyVector out{std::vector<double>(q, 0.0),
                    paired ? Representation::permutation_paired_sampled : Representation::permutation_sampled};
  for_each_permutation_sample(game, n, paired, seed, [&](std::span<const double> h) {
    for (int j = 0; j < q; ++j) out.phi[j] += h[j];
  });
  for (double& v : out.phi) v /= static_cast<double>(n);
  return out;
}

ShapleyVector paired_single_permutation(const GameEvaluator& game, const Permutation& pi) {
  const MarginalVector b = marginal_vector(game, pi);
  const MarginalVector br = marginal_vector(game, pi.reversed());
  ShapleyVector out{std::vector<double>(b.b.size()), Representation::permutation_paired_sampled};
  for (std::size_t j = 0; j < b.b.size(); ++j) out.phi[j] = 0.5 * (b.b[j] + br.b[j]);
  return out;
}

void validate_partition(const Partition& partition, int q) {
  std::vector<int> seen(static_cast<std::size_t>(q), 0);
  for (const auto& group : partition) {
    if (group.empty()) throw PartitionError("partition contains an empty group");
    for (int j : group) {
      if (j < 0 || j >= q) throw PartitionError("player " + std::to_string(j + 1) + " outside 1.." + std::to_string(q));
      if (seen[j]++) throw PartitionError("player " + std::to_string(j + 1) + " appears in two groups");
    }
  }
  for (int j = 0; j < q; ++j)
    if (!seen[j]) throw PartitionError("player " + std::to_string(j + 1) + " is in no group");
}

std::vector<double> group_sums(const ShapleyVector& phi, const Partition& partition) {
  validate_partition(partition, phi.q());
  std::vector<double> sums;
  sums.reserve(partition.size());
  for (const auto& group : partition) {
    double s = 0.0;
    for (int j : group) s += phi.phi[j];
    sums.push_back(s);
  }
  return sums;
}

Partition term_partition(const ValueFunctionSpec& spec) {
  std::vector<int> parent(static_cast<std::size_t>(spec.q));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Term& term : spec.terms)
    for (std::size_t k = 1; k < term.indices.size(); ++k)
      parent[find(term.indices[k])] = find(term.indices[0]);

  Partition groups;
  std::vector<int> slot(static_cast<std::size_t>(spec.q), -1);
  for (int j = 0; j < spec.q; ++j) {
    const int root = find(j);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[root]].push_back(j);
  }
  return groups;
}

std::vector<double> bilinear_block_shapley(const ValueFunctionSpec& spec, int d) {
  if (d < 1 || d > spec.q) throw DomainError("block size d must lie in 1..q");
  std::vector<double> phi(static_cast<std::size_t>(d), 0.0);
  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    const Term& term = spec.terms[t];
    const auto inside = std::count_if(term.indices.begin(), term.indices.end(), [d](int j) { return j < d; });
    if (inside == 0) continue;
    if (inside != static_cast<long>(term.indices.size()))
      throw SpecError("term " + std::to_string(t + 1) + " mixes players inside and outside 1.." + std::to_string(d));
    if (term.kind != TermKind::linear && term.kind != TermKind::bilinear)
      throw SpecError("term " + std::to_string(t + 1) + " on the block is not bilinear");
    const std::size_t m = term.indices.size();
    for (std::size_t r = 0; r < m; ++r) {
      if (term.kind == TermKind::linear) {
        phi[term.indices[r]] += term.beta[r];
        continue;
      }
      for (std::size_t c = 0; c < m; ++c) phi[term.indices[r]] += 0.5 * (term.a[r * m + c] + term.a[c * m + r]);
    }
  }
  return phi;
}

std::vector<double> separated_exact_check(const GameEvaluator& game, int d, const Permutation& pi) {
  const ValueFunctionSpec* spec = game.spec();
  if (spec == nullptr) throw SpecError("separation must be declared through a value-function spec");
  bilinear_block_shapley(*spec, d);  // validates the declared separation
  const ShapleyVector est = paired_single_permutation(game, pi);
  return {est.phi.begin(), est.phi.begin() + d};
}

}  // namespace pairshap

#include "pairshap/kernel_shap.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "pairshap/errors.hpp"

namespace pairshap {
namespace {

linalg::Matrix design_matrix(std::span<const Coalition> draws, bool paired, int q) {
  linalg::Matrix design(draws.size() * (paired ? 2 : 1), q - 1);
  std::size_t r = 0;
  for (const Coalition& z : draws) {
    kernel_regressor(z, design.row(r++));
    if (paired) kernel_regressor(z.complement(), design.row(r++));
  }
  return design;
}

std::vector<double> responses(const GameEvaluator& game, std::span<const Coalition> draws, bool paired,
                              double grand) {
  const int q = game.q();
  std::vector<double> y;
  y.reserve(draws.size() * (paired ? 2 : 1));
  for (const Coalition& z : draws) {
    y.push_back(game.evaluate(z) - z[q - 1] * grand);
    if (paired) {
      const Coalition zc = z.complement();
      y.push_back(game.evaluate(zc) - zc[q - 1] * grand);
    }
  }
  return y;
}

ShapleyVector complete(const linalg::Vector& head, double grand, Representation method) {
  ShapleyVector out{std::vector<double>(head.size() + 1), method};
  std::copy(head.begin(), head.end(), out.phi.begin());
  out.phi.back() = grand - std::accumulate(head.begin(), head.end(), 0.0);
  return out;
}

}  // namespace

Coalition sample_coalition(const KernelWeights& weights, Rng& rng) {
  const int q = weights.q();
  const auto mass = weights.size_probabilities();
  const double u = rng.uniform01();
  int size = q - 1;
  double acc = 0.0;
  for (int s = 1; s < q; ++s) {
    acc += mass[s - 1];
    if (u < acc) {
      size = s;
      break;
    }
  }
  std::vector<int> players(static_cast<std::size_t>(q));
  std::iota(players.begin(), players.end(), 0);
  Coalition c(q);
  for (int i = 0; i < size; ++i) {
    const auto pick = static_cast<std::size_t>(i) + rng.below(static_cast<std::uint64_t>(q - i));
    std::swap(players[i], players[pick]);
    c.set(players[i]);
  }
  return c;
}

KernelEstimate estimate_kernel(const GameEvaluator& game, std::size_t n, bool paired, std::uint64_t seed) {
  if (n < 1) throw DomainError("kernel estimation needs n >= 1");
  const int q = game.q();
  const KernelWeights weights(q);

  for (int attempt = 0; attempt < kMaxRankRedraws; ++attempt) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(attempt)}));
    KernelSampleBatch batch;
    batch.paired = paired;
    batch.seed = seed;
    batch.retries = attempt;
    batch.draws.reserve(n);
    for (std::size_t i = 0; i < n; ++i) batch.draws.push_back(sample_coalition(weights, rng));
    batch.design = design_matrix(batch.draws, paired, q);
    if (linalg::rank(batch.design, kDesignRankTol) < static_cast<std::size_t>(q - 1)) continue;

    const double grand = game.evaluate(Coalition::full(q));
    batch.response = responses(game, batch.draws, paired, grand);
    const linalg::Vector head = linalg::least_squares(batch.design, batch.response);
    auto method = paired ? Representation::kernel_paired_sampled : Representation::kernel_sampled;
    return {complete(head, grand, method), std::move(batch)};
  }
  throw RankDeficient("design matrix rank < q-1 after " + std::to_string(kMaxRankRedraws) +
                      " redraws; n is too small for q = " + std::to_string(q));
}

ShapleyVector solve_bilinear_basis(const GameEvaluator& game, std::span<const Coalition> basis) {
  const int q = game.q();
  if (basis.size() != static_cast<std::size_t>(q - 1))
    throw DimensionError("a basis needs q-1 = " + std::to_string(q - 1) + " coalitions");
  for (const Coalition& z : basis)
    if (z.q() != q) throw DimensionError("basis coalition has the wrong number of players");
  const linalg::Matrix design = design_matrix(basis, true, q);
  if (linalg::rank(design, kDesignRankTol) < static_cast<std::size_t>(q - 1))
    throw RankDeficient("basis coalitions are linearly dependent");
  const double grand = game.evaluate(Coalition::full(q));
  const auto y = responses(game, basis, true, grand);
  return complete(linalg::least_squares(design, y), grand, Representation::bilinear_basis);
}

std::vector<Coalition> random_independent_basis(int q, Rng& rng) {
  const KernelWeights weights(q);
  for (int attempt = 0; attempt < kMaxRankRedraws; ++attempt) {
    std::vector<Coalition> basis;
    for (int i = 0; i + 1 < q; ++i) basis.push_back(sample_coalition(weights, rng));
    if (linalg::rank(design_matrix(basis, false, q), kDesignRankTol) == static_cast<std::size_t>(q - 1))
      return basis;
  }
  throw RankDeficient("could not draw an independent coalition basis");
}

BilinearityVerdict bilinearity_test(const GameEvaluator& game, int trials, double tol, std::uint64_t seed) {
  if (trials < 2) throw DomainError("bilinearity test needs at least 2 trials");
  if (!(tol >= 0.0)) throw DomainError("tolerance must be non-negative");
  std::vector<ShapleyVector> results;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    const auto basis = random_independent_basis(game.q(), rng);
    results.push_back(solve_bilinear_basis(game, basis));
  }
  BilinearityVerdict verdict;
  verdict.trials = trials;
  for (std::size_t a = 0; a < results.size(); ++a)
    for (std::size_t b = a + 1; b < results.size(); ++b)
      verdict.max_discrepancy = std::max(verdict.max_discrepancy, max_discrepancy(results[a], results[b]));
  verdict.consistent = verdict.max_discrepancy <= tol;
  return verdict;
}

}  // namespace pairshap

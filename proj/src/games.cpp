#include "pairshap/games.hpp"

#include <algorithm>
#include <numeric>

#include "pairshap/errors.hpp"

namespace pairshap::games {
namespace {

std::vector<double> flatten(const linalg::Matrix& a, std::size_t m) {
  if (a.rows() != m || a.cols() != m) throw DimensionError("coefficient matrix does not match indices");
  return {a.data().begin(), a.data().end()};
}

std::vector<int> range(int first, int count) {
  std::vector<int> idx(static_cast<std::size_t>(count));
  std::iota(idx.begin(), idx.end(), first);
  return idx;
}

}  // namespace

Term linear_term(std::vector<int> indices, std::vector<double> beta, double offset) {
  return Term{TermKind::linear, std::move(indices), std::move(beta), {}, offset};
}

Term bilinear_term(std::vector<int> indices, const linalg::Matrix& a, double offset) {
  auto flat = flatten(a, indices.size());
  return Term{TermKind::bilinear, std::move(indices), {}, std::move(flat), offset};
}

Term exp_linear_term(std::vector<int> indices, std::vector<double> beta, double offset) {
  return Term{TermKind::exp_linear, std::move(indices), std::move(beta), {}, offset};
}

Term exp_bilinear_term(std::vector<int> indices, const linalg::Matrix& a, double offset) {
  auto flat = flatten(a, indices.size());
  return Term{TermKind::exp_bilinear, std::move(indices), {}, std::move(flat), offset};
}

ValueFunctionSpec linear(std::span<const double> beta) {
  const int q = static_cast<int>(beta.size());
  return {q, {linear_term(range(0, q), {beta.begin(), beta.end()})}};
}

ValueFunctionSpec bilinear(const linalg::Matrix& a) {
  const int q = static_cast<int>(a.rows());
  return {q, {bilinear_term(range(0, q), a)}};
}

ValueFunctionSpec exp_linear(std::span<const double> beta, double offset) {
  const int q = static_cast<int>(beta.size());
  return {q, {exp_linear_term(range(0, q), {beta.begin(), beta.end()}, offset)}};
}

ValueFunctionSpec example_exp_linear_q4() {
  const std::vector<double> beta{-0.5, 0.1, 0.8, -0.2};
  return exp_linear(beta, -1.0);
}

ValueFunctionSpec block_exp_bilinear(const std::vector<linalg::Matrix>& blocks) {
  ValueFunctionSpec spec;
  int next = 0;
  for (const auto& a : blocks) {
    const int m = static_cast<int>(a.rows());
    spec.terms.push_back(exp_bilinear_term(range(next, m), a));
    next += m;
  }
  spec.q = next;
  return spec;
}

ValueFunctionSpec separated(const linalg::Matrix& bilinear_block, const linalg::Matrix& exp_block) {
  const int d = static_cast<int>(bilinear_block.rows());
  const int m = static_cast<int>(exp_block.rows());
  return {d + m, {bilinear_term(range(0, d), bilinear_block), exp_bilinear_term(range(d, m), exp_block)}};
}

linalg::Matrix normal_matrix(Rng& rng, std::size_t n, double scale) {
  linalg::Matrix a(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = scale * rng.normal();
  return a;
}

std::vector<double> normal_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

ValueFunctionSpec random_mixed(Rng& rng, int q) {
  ValueFunctionSpec spec;
  spec.q = q;
  const int n_terms = 1 + static_cast<int>(rng.below(3));
  for (int t = 0; t < n_terms; ++t) {
    // Uniform subset of 1..min(q, 4) players via a partial shuffle.
    std::vector<int> players = range(0, q);
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(q, 4))));
    for (int i = 0; i < m; ++i) std::swap(players[i], players[i + rng.below(q - i)]);
    std::vector<int> idx(players.begin(), players.begin() + m);
    const double offset = rng.normal();
    switch (rng.below(4)) {
      case 0: spec.terms.push_back(linear_term(idx, normal_vector(rng, m), offset)); break;
      case 1: spec.terms.push_back(bilinear_term(idx, normal_matrix(rng, m, 0.5), offset)); break;
      case 2: spec.terms.push_back(exp_linear_term(idx, normal_vector(rng, m, 0.5), offset)); break;
      default: spec.terms.push_back(exp_bilinear_term(idx, normal_matrix(rng, m, 0.3), offset)); break;
    }
  }
  return spec;
}

std::vector<double> bilinear_shapley(const linalg::Matrix& a) {
  std::vector<double> phi(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.rows(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) phi[j] += 0.5 * (a(j, k) + a(k, j));
  return phi;
}

}  // namespace pairshap::games

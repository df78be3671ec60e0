#ifndef PAIRSHAP_GAMES_HPP
#define PAIRSHAP_GAMES_HPP

#include <span>
#include <vector>

#include "pairshap/linalg.hpp"
#include "pairshap/random.hpp"
#include "pairshap/value_function.hpp"

// Builders for the value functions used by the experiments and tests.
namespace pairshap::games {

Term linear_term(std::vector<int> indices, std::vector<double> beta, double offset = 0.0);
Term bilinear_term(std::vector<int> indices, const linalg::Matrix& a, double offset = 0.0);
Term exp_linear_term(std::vector<int> indices, std::vector<double> beta, double offset = 0.0);
Term exp_bilinear_term(std::vector<int> indices, const linalg::Matrix& a, double offset = 0.0);

// nu(Z) = beta'Z on all q players.
ValueFunctionSpec linear(std::span<const double> beta);
// nu(Z) = Z'AZ on all q players.
ValueFunctionSpec bilinear(const linalg::Matrix& a);
// nu(Z) = exp(beta'Z) + offset on all q players.
ValueFunctionSpec exp_linear(std::span<const double> beta, double offset);

// q = 4, nu(Z) = exp(Z'beta) - 1 with beta = (-0.5, 0.1, 0.8, -0.2).
ValueFunctionSpec example_exp_linear_q4();

// Sum of exp(Z_k' A_k Z_k) over consecutive blocks of the given sizes.
ValueFunctionSpec block_exp_bilinear(const std::vector<linalg::Matrix>& blocks);

// Bilinear block on players 0..d-1 plus exp_bilinear block on the next
// players; the two blocks share no player.
ValueFunctionSpec separated(const linalg::Matrix& bilinear_block, const linalg::Matrix& exp_block);

// Entries i.i.d. N(0, scale^2).
linalg::Matrix normal_matrix(Rng& rng, std::size_t n, double scale = 1.0);
std::vector<double> normal_vector(Rng& rng, std::size_t n, double scale = 1.0);

// Random game mixing all four term kinds on random player subsets. Exponent
// parameters are scaled so values stay moderate.
ValueFunctionSpec random_mixed(Rng& rng, int q);

// Expected exact Shapley vector of a pure bilinear form: (A + A')1 / 2.
std::vector<double> bilinear_shapley(const linalg::Matrix& a);

}  // namespace pairshap::games

#endif  // PAIRSHAP_GAMES_HPP

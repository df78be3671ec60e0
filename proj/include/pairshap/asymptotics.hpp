#ifndef PAIRSHAP_ASYMPTOTICS_HPP
#define PAIRSHAP_ASYMPTOTICS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pairshap/exact.hpp"
#include "pairshap/kernel_shap.hpp"
#include "pairshap/linalg.hpp"
#include "pairshap/perm_shap.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {

inline constexpr int kMaxKernelMatrixPlayers = 20;
// Eigenvalues with |lambda| <= kNullEigenvalueRel * trace count as zero.
inline constexpr double kNullEigenvalueRel = 1e-12;

enum class CovarianceMethod { kernel, kernel_paired, permutation, permutation_paired };

const char* to_string(CovarianceMethod m);
CovarianceMethod covariance_method_from_string(std::string_view name);
bool is_kernel(CovarianceMethod m);

// Evaluations of nu charged per sample: 1, 2, q and 2q.
double evaluations_per_sample(CovarianceMethod m, int q);

// Divisor used for the variance over the q! enumerated orderings: q!
// (population, the CLT covariance) or q! - 1 (sample convention).
enum class SigmaNormalization { population, enumeration_sample };

struct Provenance {
  bool exact = true;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

struct CovarianceReport {
  CovarianceMethod method = CovarianceMethod::kernel;
  Provenance provenance;
  int q = 0;
  linalg::Matrix matrix;
  std::vector<double> eigenvalues;  // descending
  double trace = 0.0;
  // The residual driving the matrix vanishes: linear game for the unpaired
  // kernel, bilinear game for the paired estimators.
  bool degenerate = false;

  nlohmann::json to_json() const;
};

CovarianceReport make_report(linalg::Matrix matrix, CovarianceMethod method, Provenance provenance, int q);

// I (or I_2), J (or J_2) and T = J^{-1} I J^{-1} (or T_2).
struct KernelMatrices {
  linalg::Matrix score_outer;
  linalg::Matrix hessian;
  linalg::Matrix covariance;
  bool degenerate = false;
};

// Expectations under p by enumeration. Throws SizeGuard for
// q > kMaxKernelMatrixPlayers.
KernelMatrices kernel_matrices_exact(const GameEvaluator& game, bool paired);
KernelMatrices kernel_matrices_exact(const CoalitionTable& table, bool paired);

// Empirical means over the batch, residuals formed with the batch estimate.
KernelMatrices kernel_matrices_plugin(const KernelSampleBatch& batch, const ShapleyVector& phi_hat);

// Sigma = Var(B_pi + B_rho(pi)) / 4 over all q! orderings (paired), or
// Var(B_pi) (unpaired). Throws SizeGuard for q > kMaxPermutationPlayers.
CovarianceReport permutation_covariance_exact(const GameEvaluator& game, bool paired, SigmaNormalization norm);
CovarianceReport sigma_exact(const GameEvaluator& game,
                             SigmaNormalization norm = SigmaNormalization::enumeration_sample);

// Sample covariance (n - 1 divisor) of the per-draw vectors of
// estimate_permutation with the same seed.
CovarianceReport permutation_covariance_plugin(const GameEvaluator& game, std::size_t n, bool paired,
                                               std::uint64_t seed);
CovarianceReport sigma_plugin(const GameEvaluator& game, std::size_t n, std::uint64_t seed);

// Kernel covariance of (phi_1..phi_{q-1}) lifted to all q components through
// phi_q = nu(1) - sum of the others.
linalg::Matrix lift_kernel_covariance(const linalg::Matrix& head);

// Smallest eigenvalue of T - T_2.
double psd_gap(const linalg::Matrix& t, const linalg::Matrix& t2);

std::vector<double> positive_eigenvalues(const CovarianceReport& report);
// Eigenvalues scaled by evaluations_per_sample.
std::vector<double> dimension_adjusted_eigs(const CovarianceReport& report);

// Connected components of the graph j ~ k iff |Sigma_jk| > threshold.
Partition detect_blocks(const CovarianceReport& sigma, double threshold);

}  // namespace pairshap

#endif  // PAIRSHAP_ASYMPTOTICS_HPP

#ifndef PAIRSHAP_EXPERIMENTS_HPP
#define PAIRSHAP_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pairshap/asymptotics.hpp"
#include "pairshap/perm_shap.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {

enum class ExperimentKind { bias_variance, method_comparison, additive_recovery };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bias_variance;
  ValueFunctionSpec vf;
  std::vector<CovarianceMethod> methods;
  std::vector<std::size_t> sizes;  // strictly ascending
  std::size_t reps = 0;            // S >= 2
  std::uint64_t master_seed = 0;
  int jobs = 1;
  std::string csv_path;  // empty: caller decides where the CSV goes
  Partition partition;   // additive_recovery; defaults to the term partition
  std::size_t kernel_n = 100;

  // Throws SchemaError or DomainError.
  void validate() const;
};

// Parses the config document. "vf_path" is resolved against base_dir.
// Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config_file(const std::string& path);

struct ResultRow {
  CovarianceMethod method = CovarianceMethod::kernel;
  std::size_t n = 0;
  int j = 0;                  // 0-based; written 1-based
  double bias = 0.0;          // mean over replicates of |phi_hat_j - phi_j|
  double mean_error = 0.0;    // mean over replicates of phi_hat_j - phi_j
  double sigma_hat = 0.0;     // replicate standard deviation, S - 1 divisor
  double tau = 0.0;           // sqrt(diag / n) of the exact asymptotic covariance
  double evals_per_sample = 0.0;
};

struct ExperimentResult {
  std::size_t reps = 0;
  std::vector<ResultRow> rows;

  // Header method,n,j,bias,sigma_hat,tau,evals_per_sample; numbers with 17
  // significant digits.
  std::string to_csv() const;
};

// Replicate seed for (method, size index, replicate).
std::uint64_t replicate_seed(std::uint64_t master, CovarianceMethod m, std::size_t size_index, std::size_t rep);

// One sampling estimate with the estimator behind the method tag.
ShapleyVector estimate_with(const GameEvaluator& game, CovarianceMethod m, std::size_t n, std::uint64_t seed);

// Exact asymptotic covariance of all q components behind tau: lifted T or
// T_2 for the kernel methods, Var(B_pi) or Sigma (population divisor) for
// the permutation methods.
linalg::Matrix asymptotic_covariance(const GameEvaluator& game, CovarianceMethod m);

ExperimentResult run_bias_variance(const ExperimentConfig& config);

struct EigenComparison {
  CovarianceReport kernel_paired;       // T_2
  CovarianceReport permutation_paired;  // Sigma, population divisor
  std::vector<double> kernel_adjusted;
  std::vector<double> permutation_adjusted;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

EigenComparison run_method_comparison(const GameEvaluator& game);
EigenComparison run_method_comparison(const ExperimentConfig& config);

// nu(Z) = exp(Z'beta) - 1 with beta i.i.d. N(0, 1) drawn from the seed.
ValueFunctionSpec seeded_exp_linear(int q, std::uint64_t seed);

struct GroupComparison {
  std::vector<int> players;  // 0-based
  double exact = 0.0;
  double permutation_paired = 0.0;  // one paired permutation
  double kernel_paired = 0.0;       // paired kernel with kernel_n draws
};

struct AdditiveRecoveryTable {
  std::vector<GroupComparison> groups;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

AdditiveRecoveryTable run_additive_recovery(const GameEvaluator& game, const Partition& partition,
                                            std::size_t kernel_n, std::uint64_t seed);
AdditiveRecoveryTable run_additive_recovery(const ExperimentConfig& config);

// Runs whichever experiment the config names and returns its CSV text.
std::string run_experiment_csv(const ExperimentConfig& config);

}  // namespace pairshap

#endif  // PAIRSHAP_EXPERIMENTS_HPP

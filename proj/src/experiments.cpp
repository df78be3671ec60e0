#include "pairshap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "pairshap/errors.hpp"
#include "pairshap/exact.hpp"
#include "pairshap/games.hpp"
#include "pairshap/kernel_shap.hpp"
#include "pairshap/random.hpp"

namespace pairshap {
namespace {

using nlohmann::json;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs task(i) for i in [0, count) on up to `jobs` threads. Each task writes
// only its own slot, so the outcome does not depend on the schedule.
template <class Task>
void parallel_for(std::size_t count, int jobs, Task task) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw SchemaError("experiment config: unknown key '" + key + "'");
}

std::uint64_t unsigned_field(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw SchemaError(std::string("experiment config: '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::bias_variance: return "bias_variance";
    case ExperimentKind::method_comparison: return "method_comparison";
    case ExperimentKind::additive_recovery: return "additive_recovery";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "bias_variance") return ExperimentKind::bias_variance;
  if (name == "method_comparison") return ExperimentKind::method_comparison;
  if (name == "additive_recovery") return ExperimentKind::additive_recovery;
  throw SchemaError("unknown experiment '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  vf.validate();
  if (jobs < 1) throw DomainError("jobs must be >= 1");
  switch (kind) {
    case ExperimentKind::bias_variance:
      if (methods.empty()) throw SchemaError("experiment config: 'methods' must be nonempty");
      if (sizes.empty()) throw SchemaError("experiment config: 'sizes' must be nonempty");
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw DomainError("sample sizes must be >= 1");
        if (i > 0 && sizes[i] <= sizes[i - 1]) throw DomainError("sample sizes must be strictly ascending");
      }
      if (reps < 2) throw DomainError("reps must be >= 2");
      break;
    case ExperimentKind::method_comparison:
      break;
    case ExperimentKind::additive_recovery:
      if (!partition.empty()) validate_partition(partition, vf.q);
      if (kernel_n < 1) throw DomainError("kernel_n must be >= 1");
      break;
  }
}

ExperimentConfig config_from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw SchemaError("experiment config must be a JSON object");
  reject_unknown_keys(doc, {"experiment", "vf", "vf_path", "methods", "sizes", "reps", "master_seed", "jobs",
                            "outputs", "partition", "kernel_n", "q"});
  ExperimentConfig c;
  if (doc.contains("experiment")) {
    if (!doc["experiment"].is_string()) throw SchemaError("experiment config: 'experiment' must be a string");
    c.kind = experiment_kind_from_string(doc["experiment"].get<std::string>());
  }
  if (doc.contains("master_seed")) c.master_seed = unsigned_field(doc, "master_seed");

  const bool inline_vf = doc.contains("vf");
  const bool file_vf = doc.contains("vf_path");
  if (inline_vf && file_vf) throw SchemaError("experiment config: give either 'vf' or 'vf_path', not both");
  if (inline_vf) {
    c.vf = spec_from_json(doc["vf"]);
  } else if (file_vf) {
    if (!doc["vf_path"].is_string()) throw SchemaError("experiment config: 'vf_path' must be a string");
    std::filesystem::path p = doc["vf_path"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    c.vf = load_spec_file(p.string());
  } else if (c.kind == ExperimentKind::method_comparison) {
    const int q = doc.contains("q") ? static_cast<int>(unsigned_field(doc, "q")) : 8;
    c.vf = seeded_exp_linear(q, c.master_seed);
  } else {
    throw SchemaError("experiment config: missing 'vf' or 'vf_path'");
  }
  if (doc.contains("q") && (inline_vf || file_vf)) throw SchemaError("experiment config: 'q' only applies without a vf");

  if (doc.contains("methods")) {
    if (!doc["methods"].is_array()) throw SchemaError("experiment config: 'methods' must be an array");
    for (const auto& m : doc["methods"]) {
      if (!m.is_string()) throw SchemaError("experiment config: methods must be strings");
      c.methods.push_back(covariance_method_from_string(m.get<std::string>()));
    }
  }
  if (doc.contains("sizes")) {
    if (!doc["sizes"].is_array()) throw SchemaError("experiment config: 'sizes' must be an array");
    for (const auto& n : doc["sizes"]) {
      if (!n.is_number_integer() || n.get<std::int64_t>() < 1)
        throw SchemaError("experiment config: sizes must be positive integers");
      c.sizes.push_back(n.get<std::size_t>());
    }
  }
  if (doc.contains("reps")) c.reps = unsigned_field(doc, "reps");
  if (doc.contains("jobs")) c.jobs = static_cast<int>(unsigned_field(doc, "jobs"));
  if (doc.contains("kernel_n")) c.kernel_n = unsigned_field(doc, "kernel_n");
  if (doc.contains("outputs")) {
    const json& out = doc["outputs"];
    if (!out.is_object()) throw SchemaError("experiment config: 'outputs' must be an object");
    reject_unknown_keys(out, {"csv"});
    if (out.contains("csv")) {
      if (!out["csv"].is_string()) throw SchemaError("experiment config: 'outputs.csv' must be a string");
      std::filesystem::path p = out["csv"].get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.csv_path = p.string();
    }
  }
  if (doc.contains("partition")) {
    const json& part = doc["partition"];
    if (!part.is_array()) throw PartitionError("partition must be an array of groups");
    for (const auto& group : part) {
      if (!group.is_array()) throw PartitionError("partition groups must be arrays of player indices");
      std::vector<int> g;
      for (const auto& j : group) {
        if (!j.is_number_integer()) throw PartitionError("partition entries must be integers");
        g.push_back(j.get<int>() - 1);
      }
      c.partition.push_back(std::move(g));
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read experiment config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON in experiment config: ") + e.what());
  }
  const auto parent = std::filesystem::path(path).parent_path();
  return config_from_json(doc, parent.empty() ? "." : parent.string());
}

std::string ExperimentResult::to_csv() const {
  std::string out = "method,n,j,bias,sigma_hat,tau,evals_per_sample\n";
  for (const ResultRow& r : rows) {
    out += to_string(r.method);
    out += ',' + std::to_string(r.n) + ',' + std::to_string(r.j + 1) + ',' + number(r.bias) + ',' +
           number(r.sigma_hat) + ',' + number(r.tau) + ',' + number(r.evals_per_sample) + '\n';
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t master, CovarianceMethod m, std::size_t size_index, std::size_t rep) {
  return derive_seed(master, {static_cast<std::uint64_t>(m), size_index, rep});
}

ShapleyVector estimate_with(const GameEvaluator& game, CovarianceMethod m, std::size_t n, std::uint64_t seed) {
  switch (m) {
    case CovarianceMethod::kernel: return estimate_kernel(game, n, false, seed).phi;
    case CovarianceMethod::kernel_paired: return estimate_kernel(game, n, true, seed).phi;
    case CovarianceMethod::permutation: return estimate_permutation(game, n, false, seed);
    case CovarianceMethod::permutation_paired: return estimate_permutation(game, n, true, seed);
  }
  throw std::logic_error("unreachable");
}

linalg::Matrix asymptotic_covariance(const GameEvaluator& game, CovarianceMethod m) {
  if (is_kernel(m))
    return lift_kernel_covariance(kernel_matrices_exact(game, m == CovarianceMethod::kernel_paired).covariance);
  return permutation_covariance_exact(game, m == CovarianceMethod::permutation_paired, SigmaNormalization::population)
      .matrix;
}

ExperimentResult run_bias_variance(const ExperimentConfig& config) {
  config.validate();
  const GameEvaluator game(config.vf);
  const int q = game.q();
  const ShapleyVector exact = shapley_subset(game);
  const auto S = static_cast<double>(config.reps);

  ExperimentResult result;
  result.reps = config.reps;
  for (CovarianceMethod m : config.methods) {
    const linalg::Matrix cov = asymptotic_covariance(game, m);
    for (std::size_t k = 0; k < config.sizes.size(); ++k) {
      const std::size_t n = config.sizes[k];
      std::vector<std::vector<double>> estimates(config.reps);
      parallel_for(config.reps, config.jobs, [&](std::size_t s) {
        estimates[s] = estimate_with(game, m, n, replicate_seed(config.master_seed, m, k, s)).phi;
      });
      for (int j = 0; j < q; ++j) {
        double abs_sum = 0.0, err_sum = 0.0, mean = 0.0;
        for (const auto& est : estimates) {
          abs_sum += std::abs(est[j] - exact.phi[j]);
          err_sum += est[j] - exact.phi[j];
          mean += est[j];
        }
        mean /= S;
        double ss = 0.0;
        for (const auto& est : estimates) ss += (est[j] - mean) * (est[j] - mean);
        ResultRow row;
        row.method = m;
        row.n = n;
        row.j = j;
        row.bias = abs_sum / S;
        row.mean_error = err_sum / S;
        row.sigma_hat = std::sqrt(ss / (S - 1.0));
        row.tau = std::sqrt(std::max(cov(j, j), 0.0) / static_cast<double>(n));
        row.evals_per_sample = evaluations_per_sample(m, q);
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

ValueFunctionSpec seeded_exp_linear(int q, std::uint64_t seed) {
  Rng rng(seed);
  const auto beta = games::normal_vector(rng, static_cast<std::size_t>(q));
  return games::exp_linear(beta, -1.0);
}

EigenComparison run_method_comparison(const GameEvaluator& game) {
  const int q = game.q();
  EigenComparison out;
  out.kernel_paired = make_report(kernel_matrices_exact(game, true).covariance, CovarianceMethod::kernel_paired,
                                  Provenance{}, q);
  out.permutation_paired = permutation_covariance_exact(game, true, SigmaNormalization::population);
  out.kernel_adjusted = dimension_adjusted_eigs(out.kernel_paired);
  out.permutation_adjusted = dimension_adjusted_eigs(out.permutation_paired);
  return out;
}

EigenComparison run_method_comparison(const ExperimentConfig& config) {
  config.validate();
  const GameEvaluator game(config.vf);
  return run_method_comparison(game);
}

std::string EigenComparison::to_csv() const {
  std::string out = "method,k,eigenvalue,adjusted\n";
  auto emit = [&](const CovarianceReport& r, const std::vector<double>& adjusted) {
    for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
      out += std::string(to_string(r.method)) + ',' + std::to_string(k + 1) + ',' + number(r.eigenvalues[k]) + ',' +
             number(adjusted[k]) + '\n';
  };
  emit(kernel_paired, kernel_adjusted);
  emit(permutation_paired, permutation_adjusted);
  return out;
}

json EigenComparison::to_json() const {
  return json{{"kernel-paired", {{"eigenvalues", kernel_paired.eigenvalues},
                                 {"adjusted", kernel_adjusted},
                                 {"trace", kernel_paired.trace}}},
              {"permutation-paired", {{"eigenvalues", permutation_paired.eigenvalues},
                                      {"adjusted", permutation_adjusted},
                                      {"trace", permutation_paired.trace}}}};
}

AdditiveRecoveryTable run_additive_recovery(const GameEvaluator& game, const Partition& partition,
                                            std::size_t kernel_n, std::uint64_t seed) {
  const int q = game.q();
  validate_partition(partition, q);
  const ShapleyVector exact = shapley_subset(game);
  Rng rng(derive_seed(seed, {0}));
  const ShapleyVector perm = paired_single_permutation(game, sample_permutation(q, rng));
  const ShapleyVector kern = estimate_kernel(game, kernel_n, true, derive_seed(seed, {1})).phi;
  const auto exact_sums = group_sums(exact, partition);
  const auto perm_sums = group_sums(perm, partition);
  const auto kern_sums = group_sums(kern, partition);

  AdditiveRecoveryTable table;
  for (std::size_t g = 0; g < partition.size(); ++g)
    table.groups.push_back({partition[g], exact_sums[g], perm_sums[g], kern_sums[g]});
  return table;
}

AdditiveRecoveryTable run_additive_recovery(const ExperimentConfig& config) {
  config.validate();
  const GameEvaluator game(config.vf);
  const Partition partition = config.partition.empty() ? term_partition(config.vf) : config.partition;
  return run_additive_recovery(game, partition, config.kernel_n, config.master_seed);
}

std::string AdditiveRecoveryTable::to_csv() const {
  std::string out = "group,players,exact,permutation_paired,kernel_paired\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string players;
    for (int j : groups[g].players) players += (players.empty() ? "" : " ") + std::to_string(j + 1);
    out += std::to_string(g + 1) + ',' + players + ',' + number(groups[g].exact) + ',' +
           number(groups[g].permutation_paired) + ',' + number(groups[g].kernel_paired) + '\n';
  }
  return out;
}

json AdditiveRecoveryTable::to_json() const {
  json rows = json::array();
  for (const auto& g : groups) {
    json players = json::array();
    for (int j : g.players) players.push_back(j + 1);
    rows.push_back({{"players", players},
                    {"exact", g.exact},
                    {"permutation-paired", g.permutation_paired},
                    {"kernel-paired", g.kernel_paired}});
  }
  return json{{"groups", rows}};
}

std::string run_experiment_csv(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::bias_variance: return run_bias_variance(config).to_csv();
    case ExperimentKind::method_comparison: return run_method_comparison(config).to_csv();
    case ExperimentKind::additive_recovery: return run_additive_recovery(config).to_csv();
  }
  throw std::logic_error("unreachable");
}

}  // namespace pairshap

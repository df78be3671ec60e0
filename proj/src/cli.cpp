#include "pairshap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "pairshap/asymptotics.hpp"
#include "pairshap/errors.hpp"
#include "pairshap/exact.hpp"
#include "pairshap/experiments.hpp"
#include "pairshap/kernel_shap.hpp"
#include "pairshap/perm_shap.hpp"
#include "pairshap/value_function.hpp"

namespace pairshap {
namespace {

using nlohmann::json;

struct Options {
  std::string vf;
  std::string method;
  bool tsv = false;
  bool paired = false;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string stderr_from = "exact";
  bool exact = false;
  std::optional<std::size_t> plugin;
  bool adjusted = false;
  std::string normalization = "sample";
  std::string config;
  std::string out_path;
  int jobs = 0;
  double threshold = 0.0;
  int trials = 0;
  double tol = 1e-9;
};

std::string tsv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw SchemaError("this command is randomized and requires --seed");
  return *o.seed;
}

void print_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

int cmd_exact(const Options& o, std::ostream& out) {
  const GameEvaluator game(load_spec_file(o.vf));
  std::vector<ShapleyVector> results;
  if (o.method == "subset" || o.method == "all") results.push_back(shapley_subset(game));
  if (o.method == "permutation" || o.method == "all") results.push_back(shapley_all_permutations(game));
  if (o.method == "kernel" || o.method == "all") results.push_back(shapley_kernel_exact(game));

  double discrepancy = 0.0;
  for (std::size_t a = 0; a < results.size(); ++a)
    for (std::size_t b = a + 1; b < results.size(); ++b)
      discrepancy = std::max(discrepancy, max_discrepancy(results[a], results[b]));

  if (o.tsv) {
    out << "method\tj\tphi\n";
    for (const auto& r : results)
      for (int j = 0; j < r.q(); ++j) out << to_string(r.method) << '\t' << j + 1 << '\t' << tsv_number(r.phi[j]) << '\n';
    return 0;
  }
  json doc;
  doc["q"] = game.q();
  doc["results"] = json::array();
  for (const auto& r : results) doc["results"].push_back({{"method", to_string(r.method)}, {"phi", r.phi}});
  if (o.method == "all") doc["max_discrepancy"] = discrepancy;
  print_json(out, doc);
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const GameEvaluator game(load_spec_file(o.vf));
  const std::uint64_t seed = require_seed(o);
  const int q = game.q();
  const CovarianceMethod m = o.method == "kernel"
                                 ? (o.paired ? CovarianceMethod::kernel_paired : CovarianceMethod::kernel)
                                 : (o.paired ? CovarianceMethod::permutation_paired : CovarianceMethod::permutation);

  ShapleyVector phi;
  linalg::Matrix cov;
  int retries = 0;
  if (is_kernel(m)) {
    const KernelEstimate est = estimate_kernel(game, o.n, o.paired, seed);
    phi = est.phi;
    retries = est.batch.retries;
    if (o.stderr_from == "plugin") cov = lift_kernel_covariance(kernel_matrices_plugin(est.batch, est.phi).covariance);
  } else {
    phi = estimate_permutation(game, o.n, o.paired, seed);
    if (o.stderr_from == "plugin") cov = permutation_covariance_plugin(game, o.n, o.paired, seed).matrix;
  }
  const std::uint64_t evaluations = game.evaluations();
  if (o.stderr_from == "exact") cov = asymptotic_covariance(game, m);

  std::vector<double> se(q);
  for (int j = 0; j < q; ++j) se[j] = std::sqrt(std::max(cov(j, j), 0.0) / static_cast<double>(o.n));

  if (o.tsv) {
    out << "j\tphi\tstderr\n";
    for (int j = 0; j < q; ++j) out << j + 1 << '\t' << tsv_number(phi.phi[j]) << '\t' << tsv_number(se[j]) << '\n';
    return 0;
  }
  json doc{{"method", to_string(m)},
           {"n", o.n},
           {"seed", seed},
           {"phi", phi.phi},
           {"stderr", se},
           {"stderr_from", o.stderr_from},
           {"evaluations", evaluations}};
  if (is_kernel(m)) doc["redraws"] = retries;
  print_json(out, doc);
  return 0;
}

CovarianceReport asymptotics_report(const GameEvaluator& game, CovarianceMethod m, const Options& o) {
  const int q = game.q();
  const bool paired = m == CovarianceMethod::kernel_paired || m == CovarianceMethod::permutation_paired;
  if (o.exact) {
    if (is_kernel(m)) {
      const KernelMatrices km = kernel_matrices_exact(game, paired);
      auto report = make_report(km.covariance, m, Provenance{}, q);
      report.degenerate = km.degenerate;
      return report;
    }
    const auto norm = o.normalization == "population" ? SigmaNormalization::population
                                                      : SigmaNormalization::enumeration_sample;
    return permutation_covariance_exact(game, paired, norm);
  }
  const std::uint64_t seed = require_seed(o);
  const std::size_t n = *o.plugin;
  if (is_kernel(m)) {
    const KernelEstimate est = estimate_kernel(game, n, paired, seed);
    const KernelMatrices km = kernel_matrices_plugin(est.batch, est.phi);
    auto report = make_report(km.covariance, m, Provenance{false, n, seed}, q);
    report.degenerate = km.degenerate;
    return report;
  }
  return permutation_covariance_plugin(game, n, paired, seed);
}

int cmd_asymptotics(const Options& o, std::ostream& out) {
  const GameEvaluator game(load_spec_file(o.vf));
  const CovarianceMethod m = covariance_method_from_string(o.method);
  const CovarianceReport report = asymptotics_report(game, m, o);

  if (o.tsv) {
    out << "k\teigenvalue" << (o.adjusted ? "\tadjusted" : "") << '\n';
    const auto adjusted = dimension_adjusted_eigs(report);
    for (std::size_t k = 0; k < report.eigenvalues.size(); ++k) {
      out << k + 1 << '\t' << tsv_number(report.eigenvalues[k]);
      if (o.adjusted) out << '\t' << tsv_number(adjusted[k]);
      out << '\n';
    }
    return 0;
  }
  json doc = report.to_json();
  if (o.exact && !is_kernel(m)) doc["normalization"] = o.normalization;
  if (o.adjusted) {
    doc["adjusted_eigenvalues"] = dimension_adjusted_eigs(report);
    doc["evals_per_sample"] = evaluations_per_sample(m, game.q());
  }
  if (report.degenerate) {
    const bool paired = m == CovarianceMethod::kernel_paired || m == CovarianceMethod::permutation_paired;
    doc["note"] = paired ? "BilinearDegenerate" : "LinearDegenerate";
  }
  print_json(out, doc);
  return 0;
}

int cmd_experiment(const Options& o, std::ostream& out) {
  ExperimentConfig config = load_config_file(o.config);
  if (o.jobs > 0) config.jobs = o.jobs;
  const std::string csv = run_experiment_csv(config);
  const std::string path = o.out_path.empty() ? config.csv_path : o.out_path;
  if (path.empty() || path == "-") {
    out << csv;
    return 0;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw SchemaError("cannot write '" + path + "'");
  file << csv;
  return 0;
}

int cmd_blocks(const Options& o, std::ostream& out) {
  const GameEvaluator game(load_spec_file(o.vf));
  if (!(o.threshold >= 0.0)) throw DomainError("threshold must be non-negative");
  CovarianceReport sigma;
  if (o.exact) {
    sigma = sigma_exact(game);
  } else {
    sigma = sigma_plugin(game, *o.plugin, require_seed(o));
  }
  const Partition groups = detect_blocks(sigma, o.threshold);
  if (o.tsv) {
    out << "group\tplayers\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
      out << g + 1 << '\t';
      for (std::size_t k = 0; k < groups[g].size(); ++k) out << (k ? " " : "") << groups[g][k] + 1;
      out << '\n';
    }
    return 0;
  }
  json jg = json::array();
  for (const auto& g : groups) {
    json members = json::array();
    for (int j : g) members.push_back(j + 1);
    jg.push_back(members);
  }
  json doc{{"groups", jg}, {"threshold", o.threshold}};
  doc["provenance"] = sigma.provenance.exact ? "exact-enumeration" : "plug-in";
  if (!sigma.provenance.exact) {
    doc["n"] = sigma.provenance.n;
    doc["seed"] = sigma.provenance.seed;
  }
  print_json(out, doc);
  return 0;
}

int cmd_bilinear_test(const Options& o, std::ostream& out) {
  const GameEvaluator game(load_spec_file(o.vf));
  const BilinearityVerdict v = bilinearity_test(game, o.trials, o.tol, require_seed(o));
  if (o.tsv) {
    out << "consistent\tmax_discrepancy\ttrials\n"
        << (v.consistent ? "true" : "false") << '\t' << tsv_number(v.max_discrepancy) << '\t' << v.trials << '\n';
    return 0;
  }
  print_json(out, json{{"consistent", v.consistent}, {"max_discrepancy", v.max_discrepancy}, {"trials", v.trials}});
  return 0;
}

void add_vf(CLI::App* cmd, Options& o) {
  cmd->add_option("--vf", o.vf, "Value-function JSON file")->required()->check(CLI::ExistingFile);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Exact and sampled Shapley values with paired sampling"};
  app.name("pairshap");
  app.require_subcommand(1);
  app.add_option("--jobs", o.jobs, "Worker threads for experiment replicates")->check(CLI::PositiveNumber);

  auto* exact = app.add_subcommand("exact", "Exact Shapley values");
  add_vf(exact, o);
  exact->add_option("--method", o.method)->check(CLI::IsMember({"subset", "permutation", "kernel", "all"}))->default_val("all");
  exact->add_flag("--tsv", o.tsv);

  auto* sample = app.add_subcommand("sample", "Sampling estimate with standard errors");
  add_vf(sample, o);
  sample->add_option("--method", o.method)->required()->check(CLI::IsMember({"kernel", "permutation"}));
  sample->add_flag("--paired", o.paired);
  sample->add_option("--n", o.n)->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed)->required();
  sample->add_option("--stderr-from", o.stderr_from)->check(CLI::IsMember({"exact", "plugin"}));
  sample->add_flag("--tsv", o.tsv);

  auto* asym = app.add_subcommand("asymptotics", "Asymptotic covariance matrix");
  add_vf(asym, o);
  asym->add_option("--method", o.method)
      ->required()
      ->check(CLI::IsMember({"kernel", "kernel-paired", "permutation", "permutation-paired"}));
  auto* asym_exact = asym->add_flag("--exact", o.exact);
  auto* asym_plugin = asym->add_option("--plugin", o.plugin)->check(CLI::PositiveNumber);
  asym_exact->excludes(asym_plugin);
  asym->add_option("--seed", o.seed);
  asym->add_flag("--adjusted", o.adjusted);
  asym->add_option("--normalization", o.normalization)->check(CLI::IsMember({"population", "sample"}));
  asym->add_flag("--tsv", o.tsv);

  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a config file");
  experiment->add_option("--config", o.config)->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", o.out_path, "CSV destination, '-' for standard output");
  experiment->fallthrough();

  auto* blocks = app.add_subcommand("blocks", "Additive block detection from Sigma");
  add_vf(blocks, o);
  blocks->add_option("--threshold", o.threshold)->required();
  auto* blocks_exact = blocks->add_flag("--exact", o.exact);
  auto* blocks_plugin = blocks->add_option("--plugin", o.plugin)->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  blocks_exact->excludes(blocks_plugin);
  blocks->add_option("--seed", o.seed);
  blocks->add_flag("--tsv", o.tsv);

  auto* bilinear = app.add_subcommand("bilinear-test", "Test whether a game is a bilinear form");
  add_vf(bilinear, o);
  bilinear->add_option("--trials", o.trials)->required()->check(CLI::Range(2, 100000));
  bilinear->add_option("--tol", o.tol)->required()->check(CLI::NonNegativeNumber);
  bilinear->add_option("--seed", o.seed)->required();
  bilinear->add_flag("--tsv", o.tsv);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if ((asym->parsed() || blocks->parsed()) && !o.exact && !o.plugin)
      throw CLI::ValidationError("one of --exact or --plugin N is required");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (exact->parsed()) return cmd_exact(o, out);
    if (sample->parsed()) return cmd_sample(o, out);
    if (asym->parsed()) return cmd_asymptotics(o, out);
    if (experiment->parsed()) return cmd_experiment(o, out);
    if (blocks->parsed()) return cmd_blocks(o, out);
    if (bilinear->parsed()) return cmd_bilinear_test(o, out);
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "InternalError: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace pairshap

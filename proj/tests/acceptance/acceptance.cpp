// Acceptance checks. Prints one PASS/FAIL line per criterion; with
// --criterion N only that criterion runs. The exit status is nonzero when any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pairshap/asymptotics.hpp"
#include "pairshap/cli.hpp"
#include "pairshap/exact.hpp"
#include "pairshap/experiments.hpp"
#include "pairshap/games.hpp"
#include "pairshap/kernel_shap.hpp"
#include "pairshap/perm_shap.hpp"
#include "pairshap/random.hpp"
#include "planted_games.hpp"

using namespace pairshap;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// Rounds half away from zero at `decimals` places and compares with the
// quoted figure.
bool rounds_to(double value, double quoted, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::llround(value * scale) == std::llround(quoted * scale);
}

std::vector<double> symmetric_row_sums(const linalg::Matrix& a) {
  std::vector<double> phi(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.rows(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) phi[j] += 0.5 * (a(j, k) + a(k, j));
  return phi;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

Outcome golden_exact_values() {
  Outcome o;
  const auto start = Clock::now();
  const double expected[] = {-0.6025740, 0.1194994, 0.9445458, -0.2400684};
  const GameEvaluator game(games::example_exp_linear_q4());
  const ShapleyVector results[] = {shapley_subset(game), shapley_all_permutations(game), shapley_kernel_exact(game)};
  double worst = 0.0;
  for (const auto& r : results)
    for (int j = 0; j < 4; ++j) worst = std::max(worst, std::abs(r.phi[j] - expected[j]));
  const double elapsed = seconds_since(start);
  o.require(worst <= 5e-8, "max deviation " + fmt("%.3g", worst));
  o.require(elapsed < 1.0, "runtime " + fmt("%.3f s", elapsed));
  if (o.pass) o.detail = "max deviation " + fmt("%.2g", worst) + ", " + fmt("%.4f s", elapsed);
  return o;
}

Outcome golden_spectra() {
  Outcome o;
  const auto start = Clock::now();
  const GameEvaluator game(games::example_exp_linear_q4());
  const auto t2 = make_report(kernel_matrices_exact(game, true).covariance, CovarianceMethod::kernel_paired,
                              Provenance{}, 4);
  const auto sigma = sigma_exact(game);
  const auto sigma_pos = positive_eigenvalues(sigma);

  const double t2_quoted[] = {0.00096, 0.00039, 0.00016};
  const double sigma_quoted[] = {0.00075, 0.00070, 0.00020};
  for (int k = 0; k < 3; ++k)
    o.require(rounds_to(t2.eigenvalues[k], t2_quoted[k], 5),
              "T2 eigenvalue " + std::to_string(k + 1) + " = " + fmt("%.8f", t2.eigenvalues[k]));
  o.require(rounds_to(t2.trace, 0.00151, 5), "T2 trace " + fmt("%.8f", t2.trace) + " does not round to 0.00151");
  o.require(sigma_pos.size() == 3, "Sigma has " + std::to_string(sigma_pos.size()) + " positive eigenvalues");
  for (std::size_t k = 0; k < std::min<std::size_t>(3, sigma_pos.size()); ++k)
    o.require(rounds_to(sigma_pos[k], sigma_quoted[k], 5),
              "Sigma eigenvalue " + std::to_string(k + 1) + " = " + fmt("%.8f", sigma_pos[k]));
  o.require(rounds_to(sigma.trace, 0.00165, 5), "Sigma trace " + fmt("%.8f", sigma.trace));
  const double elapsed = seconds_since(start);
  o.require(elapsed < 5.0, "runtime " + fmt("%.3f s", elapsed));
  if (o.pass) o.detail = "T2 trace " + fmt("%.6f", t2.trace) + ", Sigma trace " + fmt("%.6f", sigma.trace);
  return o;
}

Outcome representation_equivalence() {
  Outcome o;
  const auto start = Clock::now();
  double worst = 0.0;
  for (int g = 0; g < 200; ++g) {
    Rng rng(derive_seed(3, {static_cast<std::uint64_t>(g)}));
    const int q = 2 + g % 7;
    const GameEvaluator game(games::random_mixed(rng, q));
    const CoalitionTable table(game);
    const auto a = shapley_subset(table);
    const auto b = shapley_all_permutations(table);
    const auto c = shapley_kernel_exact(table);
    worst = std::max({worst, max_discrepancy(a, b), max_discrepancy(a, c), max_discrepancy(b, c)});
  }
  const double elapsed = seconds_since(start);
  o.require(worst <= 1e-9, "max pairwise discrepancy " + fmt("%.3g", worst));
  o.require(elapsed < 60.0, "runtime " + fmt("%.1f s", elapsed));
  if (o.pass) o.detail = "200 games, max discrepancy " + fmt("%.2g", worst) + ", " + fmt("%.2f s", elapsed);
  return o;
}

Outcome bilinear_kernel_exactness() {
  Outcome o;
  double worst = 0.0;
  for (int g = 0; g < 20; ++g) {
    Rng rng(derive_seed(4, {static_cast<std::uint64_t>(g)}));
    const int q = 3 + static_cast<int>(rng.below(6));
    const linalg::Matrix a = games::normal_matrix(rng, q);
    const GameEvaluator game(games::bilinear(a));
    const auto expected = symmetric_row_sums(a);
    for (int b = 0; b < 20; ++b) {
      const auto basis = random_independent_basis(q, rng);
      worst = std::max(worst, sup_distance(solve_bilinear_basis(game, basis).phi, expected));
    }
  }
  o.require(worst <= 1e-9, "max deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "400 solves, max deviation " + fmt("%.2g", worst);
  return o;
}

Outcome bilinear_permutation_exactness() {
  Outcome o;
  double worst = 0.0;
  for (int g = 0; g < 50; ++g) {
    Rng rng(derive_seed(5, {static_cast<std::uint64_t>(g)}));
    const int q = 2 + static_cast<int>(rng.below(9));
    const linalg::Matrix a = games::normal_matrix(rng, q);
    const GameEvaluator game(games::bilinear(a));
    const auto est = paired_single_permutation(game, sample_permutation(q, rng));
    worst = std::max(worst, sup_distance(est.phi, symmetric_row_sums(a)));
  }
  o.require(worst <= 1e-10, "max deviation " + fmt("%.3g", worst));
  if (o.pass) o.detail = "50 pairs, max deviation " + fmt("%.2g", worst);
  return o;
}

Outcome separated_exactness() {
  Outcome o;
  double worst = 0.0;
  int kernel_misses = 0;
  for (int g = 0; g < 20; ++g) {
    Rng rng(derive_seed(6, {static_cast<std::uint64_t>(g)}));
    const int d = 1 + g % 4;
    const linalg::Matrix bil = games::normal_matrix(rng, d);
    const linalg::Matrix ex = games::normal_matrix(rng, 3, 0.5);
    const GameEvaluator game(games::separated(bil, ex));
    const int q = game.q();
    const ShapleyVector exact = shapley_subset(game);
    const auto perm = separated_exact_check(game, d, sample_permutation(q, rng));
    worst = std::max(worst, sup_distance(perm, std::span(exact.phi).first(d)));
    const auto kern = estimate_kernel(game, 100, true, derive_seed(6, {100, static_cast<std::uint64_t>(g)})).phi;
    if (sup_distance(std::span(kern.phi).first(d), std::span(exact.phi).first(d)) > 1e-4) ++kernel_misses;
  }
  o.require(worst <= 1e-9, "permutation max deviation " + fmt("%.3g", worst));
  o.require(kernel_misses >= 15, "kernel missed in only " + std::to_string(kernel_misses) + " of 20 games");
  if (o.pass)
    o.detail = "permutation max deviation " + fmt("%.2g", worst) + ", kernel misses " +
               std::to_string(kernel_misses) + "/20";
  return o;
}

Outcome additive_recovery() {
  Outcome o;
  const auto planted = planted_three_block_game();
  const GameEvaluator game(planted.spec);
  const auto exact_sums = group_sums(shapley_subset(game), planted.partition);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Rng rng(derive_seed(7, {static_cast<std::uint64_t>(t)}));
    const auto est = paired_single_permutation(game, sample_permutation(game.q(), rng));
    worst = std::max(worst, sup_distance(group_sums(est, planted.partition), exact_sums));
  }
  const auto kern = estimate_kernel(game, 100, true, 7).phi;
  const double kernel_gap = sup_distance(group_sums(kern, planted.partition), exact_sums);
  o.require(worst <= 1e-9, "permutation group sums deviate by " + fmt("%.3g", worst));
  o.require(kernel_gap > 1e-3, "kernel group sums within " + fmt("%.3g", kernel_gap));
  if (o.pass)
    o.detail = "permutation max deviation " + fmt("%.2g", worst) + ", kernel max gap " + fmt("%.3g", kernel_gap);
  return o;
}

Outcome psd_ordering() {
  Outcome o;
  double lowest = INFINITY;
  for (int g = 0; g < 50; ++g) {
    Rng rng(derive_seed(8, {static_cast<std::uint64_t>(g)}));
    const int q = 3 + g % 5;
    const ValueFunctionSpec spec =
        g % 2 == 0 ? games::exp_linear(games::normal_vector(rng, q, 0.7), -1.0)
                   : games::block_exp_bilinear({games::normal_matrix(rng, static_cast<std::size_t>(q), 0.4)});
    const GameEvaluator game(spec);
    const CoalitionTable table(game);
    const auto t = kernel_matrices_exact(table, false);
    const auto t2 = kernel_matrices_exact(table, true);
    o.require(!t2.degenerate, "game " + std::to_string(g) + " is bilinear");
    lowest = std::min(lowest, psd_gap(t.covariance, t2.covariance));
  }
  o.require(lowest >= -1e-9, "smallest eigenvalue of T - T2 " + fmt("%.3g", lowest));
  if (o.pass) o.detail = "50 games, smallest eigenvalue " + fmt("%.3g", lowest);
  return o;
}

ExperimentConfig example_one_config(std::vector<CovarianceMethod> methods, std::vector<std::size_t> sizes,
                                    std::uint64_t seed) {
  ExperimentConfig c;
  c.vf = games::example_exp_linear_q4();
  c.methods = std::move(methods);
  c.sizes = std::move(sizes);
  c.reps = 1000;
  c.master_seed = seed;
  return c;
}

Outcome asymptotic_alignment() {
  Outcome o;
  const auto start = Clock::now();
  const auto result = run_bias_variance(example_one_config(
      {CovarianceMethod::kernel_paired, CovarianceMethod::permutation_paired}, {256, 1024, 4096}, 9));
  const double root_s = std::sqrt(static_cast<double>(result.reps));
  double lo = INFINITY, hi = 0.0, worst_bias_ratio = 0.0;
  for (const ResultRow& r : result.rows) {
    const double ratio = r.sigma_hat / r.tau;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    const double bias_ratio = std::abs(r.mean_error) / (3.0 * r.sigma_hat / root_s);
    worst_bias_ratio = std::max(worst_bias_ratio, bias_ratio);
    const std::string where = std::string(to_string(r.method)) + " n=" + std::to_string(r.n) + " j=" +
                              std::to_string(r.j + 1);
    o.require(ratio >= 0.85 && ratio <= 1.15, where + " sigma/tau " + fmt("%.3f", ratio));
    o.require(bias_ratio <= 1.0, where + " mean error " + fmt("%.3g", r.mean_error));
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 600.0, "runtime " + fmt("%.0f s", elapsed));
  if (o.pass)
    o.detail = "sigma/tau in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) + "], mean error at most " +
               fmt("%.2f", worst_bias_ratio) + " x 3 sigma/sqrt(S), " + fmt("%.1f s", elapsed);
  return o;
}

Outcome variance_reduction() {
  Outcome o;
  const auto result = run_bias_variance(
      example_one_config({CovarianceMethod::kernel, CovarianceMethod::kernel_paired}, {1024}, 10));
  const int q = 4;
  double worst = 0.0;
  for (int j = 0; j < q; ++j) {
    const double unpaired = result.rows[j].sigma_hat;
    const double paired = result.rows[q + j].sigma_hat;
    worst = std::max(worst, paired / unpaired);
    o.require(paired <= 1.05 * unpaired, "j=" + std::to_string(j + 1) + " paired " + fmt("%.4g", paired) +
                                             " vs unpaired " + fmt("%.4g", unpaired));
  }
  if (o.pass) o.detail = "largest paired/unpaired sigma ratio " + fmt("%.4f", worst);
  return o;
}

Outcome block_detection() {
  Outcome o;
  const auto planted = planted_three_block_game();
  const GameEvaluator game(planted.spec);
  const auto sigma = sigma_exact(game, SigmaNormalization::population);
  o.require(detect_blocks(sigma, 1e-8) == planted.partition, "exact Sigma does not give the planted blocks");

  const std::size_t n = 100000;
  const double threshold = plugin_block_threshold(sigma, planted.partition, n);
  int recovered = 0;
  for (int s = 0; s < 100; ++s) {
    const auto sigma_hat = sigma_plugin(game, n, derive_seed(11, {static_cast<std::uint64_t>(s)}));
    if (detect_blocks(sigma_hat, threshold) == planted.partition) ++recovered;
  }
  o.require(recovered >= 95, "plug-in recovered " + std::to_string(recovered) + " of 100");
  if (o.pass)
    o.detail = "exact ok, plug-in " + std::to_string(recovered) + "/100 at threshold " + fmt("%.3g", threshold);
  return o;
}

std::string run_capture(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = run_cli(args, out, err);
  return out.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / ("pairshap_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto vf = dir / "vf.json";
  std::ofstream(vf) << spec_to_json(games::example_exp_linear_q4()).dump();
  const auto blocks_vf = dir / "blocks.json";
  std::ofstream(blocks_vf) << spec_to_json(planted_three_block_game().spec).dump();

  const std::vector<std::vector<std::string>> commands = {
      {"sample", "--vf", vf, "--method", "kernel", "--paired", "--n", "4096", "--seed", "42"},
      {"sample", "--vf", vf, "--method", "kernel", "--n", "512", "--seed", "42", "--stderr-from", "plugin"},
      {"sample", "--vf", vf, "--method", "permutation", "--paired", "--n", "300", "--seed", "7"},
      {"asymptotics", "--vf", vf, "--method", "kernel-paired", "--plugin", "2000", "--seed", "3"},
      {"asymptotics", "--vf", vf, "--method", "permutation-paired", "--plugin", "2000", "--seed", "3"},
      {"blocks", "--vf", blocks_vf, "--threshold", "0.01", "--plugin", "2000", "--seed", "5"},
      {"bilinear-test", "--vf", vf, "--trials", "5", "--tol", "1e-9", "--seed", "1"},
  };
  for (const auto& cmd : commands) {
    int c1 = 0, c2 = 0;
    const std::string a = run_capture(cmd, c1);
    const std::string b = run_capture(cmd, c2);
    o.require(c1 == 0 && c2 == 0 && !a.empty() && a == b, cmd[0] + " output differs between runs");
  }

  const auto config = dir / "config.json";
  std::ofstream(config) << R"({"vf_path": "vf.json", "methods": ["kernel", "kernel-paired", "permutation",
    "permutation-paired"], "sizes": [64, 256], "reps": 40, "master_seed": 2024})";
  std::string reference;
  for (const char* jobs : {"1", "4", "3"}) {
    const auto csv = dir / (std::string("out_") + jobs + ".csv");
    int code = 0;
    run_capture({"experiment", "--config", config, "--out", csv, "--jobs", jobs}, code);
    const std::string text = read_file(csv);
    o.require(code == 0 && !text.empty(), std::string("experiment failed with --jobs ") + jobs);
    if (reference.empty()) reference = text;
    o.require(text == reference, std::string("CSV with --jobs ") + jobs + " differs from --jobs 1");
  }
  std::filesystem::remove_all(dir);
  if (o.pass) o.detail = std::to_string(commands.size()) + " commands and experiment CSV under --jobs 1/3/4";
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "golden exact values", golden_exact_values},
      {2, "golden spectra", golden_spectra},
      {3, "representation equivalence", representation_equivalence},
      {4, "bilinear exactness, kernel", bilinear_kernel_exactness},
      {5, "bilinear exactness, permutation", bilinear_permutation_exactness},
      {6, "separated exactness", separated_exactness},
      {7, "additive recovery", additive_recovery},
      {8, "PSD ordering", psd_ordering},
      {9, "asymptotic alignment", asymptotic_alignment},
      {10, "variance reduction", variance_reduction},
      {11, "block detection", block_detection},
      {12, "determinism", determinism},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %2d %s: %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

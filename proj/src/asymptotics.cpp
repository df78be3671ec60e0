#include "pairshap/asymptotics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pairshap/errors.hpp"

namespace pairshap {
namespace {

// Relative size of I (or I_2) below which the residual counts as vanishing.
constexpr double kDegenerateRel = 1e-20;
constexpr double kJ2Tol = 1e-12;

bool vanishes(const linalg::Matrix& m, double value_scale) {
  return linalg::max_abs(m) <= kDegenerateRel * std::max(value_scale * value_scale, 1e-300);
}

// Streaming covariance accumulator with a fixed update order.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t dim) : mean_(dim, 0.0), comoment_(dim, dim) {}

  void add(std::span<const double> x) {
    ++count_;
    std::vector<double> delta(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      delta[j] = x[j] - mean_[j];
      mean_[j] += delta[j] / static_cast<double>(count_);
    }
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = 0; b < x.size(); ++b) comoment_(a, b) += delta[a] * (x[b] - mean_[b]);
  }

  std::size_t count() const { return count_; }

  linalg::Matrix covariance(double divisor) const {
    linalg::Matrix c = linalg::symmetrized(comoment_);
    c *= 1.0 / divisor;
    return c;
  }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  linalg::Matrix comoment_;
};

}  // namespace

const char* to_string(CovarianceMethod m) {
  switch (m) {
    case CovarianceMethod::kernel: return "kernel";
    case CovarianceMethod::kernel_paired: return "kernel-paired";
    case CovarianceMethod::permutation: return "permutation";
    case CovarianceMethod::permutation_paired: return "permutation-paired";
  }
  return "?";
}

CovarianceMethod covariance_method_from_string(std::string_view name) {
  if (name == "kernel") return CovarianceMethod::kernel;
  if (name == "kernel-paired") return CovarianceMethod::kernel_paired;
  if (name == "permutation") return CovarianceMethod::permutation;
  if (name == "permutation-paired") return CovarianceMethod::permutation_paired;
  throw SchemaError("unknown method '" + std::string(name) + "'");
}

bool is_kernel(CovarianceMethod m) { return m == CovarianceMethod::kernel || m == CovarianceMethod::kernel_paired; }

double evaluations_per_sample(CovarianceMethod m, int q) {
  switch (m) {
    case CovarianceMethod::kernel: return 1.0;
    case CovarianceMethod::kernel_paired: return 2.0;
    case CovarianceMethod::permutation: return static_cast<double>(q);
    case CovarianceMethod::permutation_paired: return 2.0 * q;
  }
  return 1.0;
}

nlohmann::json CovarianceReport::to_json() const {
  nlohmann::json j;
  j["method"] = to_string(method);
  j["provenance"] = provenance.exact ? "exact-enumeration" : "plug-in";
  if (!provenance.exact) {
    j["n"] = provenance.n;
    j["seed"] = provenance.seed;
  }
  j["q"] = q;
  j["matrix"] = matrix.to_rows();
  j["eigenvalues"] = eigenvalues;
  j["trace"] = trace;
  return j;
}

CovarianceReport make_report(linalg::Matrix matrix, CovarianceMethod method, Provenance provenance, int q) {
  CovarianceReport r;
  r.method = method;
  r.provenance = provenance;
  r.q = q;
  r.eigenvalues = linalg::eig_sym(matrix).values;
  r.trace = linalg::trace(matrix);
  r.matrix = std::move(matrix);
  return r;
}

KernelMatrices kernel_matrices_exact(const GameEvaluator& game, bool paired) {
  if (game.q() > kMaxKernelMatrixPlayers)
    throw SizeGuard("exact kernel matrices support q <= " + std::to_string(kMaxKernelMatrixPlayers) + ", got " +
                    std::to_string(game.q()));
  return kernel_matrices_exact(CoalitionTable(game), paired);
}

KernelMatrices kernel_matrices_exact(const CoalitionTable& table, bool paired) {
  const int q = table.q();
  if (q > kMaxKernelMatrixPlayers)
    throw SizeGuard("exact kernel matrices support q <= " + std::to_string(kMaxKernelMatrixPlayers));
  const KernelWeights weights(q);
  const KernelMoments moments = kernel_moments(table);
  const linalg::Vector head = linalg::solve_spd(moments.hessian, moments.score);
  const double grand = table.grand();
  const std::uint64_t full = (std::uint64_t{1} << q) - 1;

  linalg::Matrix outer(q - 1, q - 1);
  linalg::Matrix hessian2(q - 1, q - 1);
  std::vector<double> x(q - 1), xc(q - 1);
  for (std::uint64_t mask = 1; mask < full; ++mask) {
    const double p = weights.coalition_probability(std::popcount(mask));
    kernel_regressor(q, mask, x);
    const double zq = static_cast<double>((mask >> (q - 1)) & 1u);
    const double fit = std::inner_product(x.begin(), x.end(), head.begin(), 0.0);
    if (paired) {
      const double psi = 0.5 * (table[mask] + grand - table[full ^ mask]) - zq * grand;
      const double r = psi - fit;
      linalg::add_outer(outer, x, 4.0 * p * r * r);
      kernel_regressor(q, full ^ mask, xc);
      linalg::add_outer(hessian2, x, p);
      linalg::add_outer(hessian2, xc, p);
    } else {
      const double r = table[mask] - zq * grand - fit;
      linalg::add_outer(outer, x, p * r * r);
    }
  }

  const double value_scale = linalg::max_abs(table.values());
  KernelMatrices out;
  out.score_outer = linalg::symmetrized(outer);
  if (paired) {
    const linalg::Matrix twice_j = 2.0 * moments.hessian;
    if (linalg::max_abs(hessian2 - twice_j) > kJ2Tol * linalg::max_abs(twice_j))
      throw std::logic_error("paired Hessian does not equal twice the unpaired one");
    out.hessian = linalg::symmetrized(hessian2);
  } else {
    out.hessian = moments.hessian;
  }
  out.covariance = linalg::sandwich(out.hessian, out.score_outer);
  out.degenerate = vanishes(out.score_outer, value_scale);
  return out;
}

KernelMatrices kernel_matrices_plugin(const KernelSampleBatch& batch, const ShapleyVector& phi_hat) {
  const std::size_t n = batch.n();
  if (n == 0) throw DomainError("plug-in matrices need a nonempty batch");
  const std::size_t p = batch.design.cols();
  if (phi_hat.phi.size() != p + 1) throw DimensionError("estimate does not match the batch design");
  const std::span<const double> head(phi_hat.phi.data(), p);

  linalg::Matrix outer(p, p);
  linalg::Matrix hessian(p, p);
  double value_scale = 0.0;
  for (double y : batch.response) value_scale = std::max(value_scale, std::abs(y));
  for (std::size_t i = 0; i < n; ++i) {
    if (batch.paired) {
      const auto x = batch.design.row(2 * i);
      const auto xc = batch.design.row(2 * i + 1);
      const double psi = 0.5 * (batch.response[2 * i] - batch.response[2 * i + 1]);
      const double r = psi - std::inner_product(x.begin(), x.end(), head.begin(), 0.0);
      linalg::add_outer(outer, x, 4.0 * r * r);
      linalg::add_outer(hessian, x, 1.0);
      linalg::add_outer(hessian, xc, 1.0);
    } else {
      const auto x = batch.design.row(i);
      const double r = batch.response[i] - std::inner_product(x.begin(), x.end(), head.begin(), 0.0);
      linalg::add_outer(outer, x, r * r);
      linalg::add_outer(hessian, x, 1.0);
    }
  }
  outer *= 1.0 / static_cast<double>(n);
  hessian *= 1.0 / static_cast<double>(n);

  KernelMatrices out;
  out.score_outer = linalg::symmetrized(outer);
  out.hessian = linalg::symmetrized(hessian);
  out.covariance = linalg::sandwich(out.hessian, out.score_outer);
  out.degenerate = vanishes(out.score_outer, value_scale);
  return out;
}

CovarianceReport permutation_covariance_exact(const GameEvaluator& game, bool paired, SigmaNormalization norm) {
  const int q = game.q();
  if (q > kMaxPermutationPlayers)
    throw SizeGuard("exact permutation covariance supports q <= " + std::to_string(kMaxPermutationPlayers) +
                    ", got " + std::to_string(q));
  const CoalitionTable table(game);

  auto walk = [&](auto first, auto last, std::vector<double>& b) {
    std::uint64_t mask = 0;
    double prev = 0.0;
    for (auto it = first; it != last; ++it) {
      mask |= std::uint64_t{1} << *it;
      const double v = table[mask];
      b[*it] = v - prev;
      prev = v;
    }
  };

  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> b(q), br(q), h(q);
  CovarianceAccumulator acc(q);
  do {
    walk(order.begin(), order.end(), b);
    if (paired) {
      walk(order.rbegin(), order.rend(), br);
      for (int j = 0; j < q; ++j) h[j] = 0.5 * (b[j] + br[j]);
      acc.add(h);
    } else {
      acc.add(b);
    }
  } while (std::next_permutation(order.begin(), order.end()));

  const auto count = static_cast<double>(acc.count());
  const double divisor = norm == SigmaNormalization::population ? count : std::max(count - 1.0, 1.0);
  auto report = make_report(acc.covariance(divisor),
                            paired ? CovarianceMethod::permutation_paired : CovarianceMethod::permutation,
                            Provenance{}, q);
  report.degenerate = vanishes(report.matrix, linalg::max_abs(table.values()));
  return report;
}

CovarianceReport sigma_exact(const GameEvaluator& game, SigmaNormalization norm) {
  return permutation_covariance_exact(game, true, norm);
}

CovarianceReport permutation_covariance_plugin(const GameEvaluator& game, std::size_t n, bool paired,
                                               std::uint64_t seed) {
  if (n < 2) throw DomainError("plug-in covariance needs n >= 2");
  const int q = game.q();
  CovarianceAccumulator acc(q);
  double value_scale = 0.0;
  for_each_permutation_sample(game, n, paired, seed, [&](std::span<const double> h) {
    acc.add(h);
    value_scale = std::max(value_scale, linalg::max_abs(h));
  });
  auto report = make_report(acc.covariance(static_cast<double>(n - 1)),
                            paired ? CovarianceMethod::permutation_paired : CovarianceMethod::permutation,
                            Provenance{false, n, seed}, q);
  report.degenerate = vanishes(report.matrix, value_scale);
  return report;
}

CovarianceReport sigma_plugin(const GameEvaluator& game, std::size_t n, std::uint64_t seed) {
  return permutation_covariance_plugin(game, n, true, seed);
}

linalg::Matrix lift_kernel_covariance(const linalg::Matrix& head) {
  const std::size_t p = head.rows();
  linalg::Matrix lift(p + 1, p);
  for (std::size_t j = 0; j < p; ++j) {
    lift(j, j) = 1.0;
    lift(p, j) = -1.0;
  }
  return linalg::symmetrized(lift * head * lift.transposed());
}

double psd_gap(const linalg::Matrix& t, const linalg::Matrix& t2) {
  if (t.rows() != t2.rows() || t.cols() != t2.cols()) throw DimensionError("psd_gap: shape mismatch");
  const auto eig = linalg::eig_sym(t - t2);
  return eig.values.empty() ? 0.0 : eig.values.back();
}

std::vector<double> positive_eigenvalues(const CovarianceReport& report) {
  const double floor = kNullEigenvalueRel * std::abs(report.trace);
  std::vector<double> out;
  for (double v : report.eigenvalues)
    if (std::abs(v) > floor) out.push_back(v);
  return out;
}

std::vector<double> dimension_adjusted_eigs(const CovarianceReport& report) {
  const double factor = evaluations_per_sample(report.method, report.q);
  std::vector<double> out = report.eigenvalues;
  for (double& v : out) v *= factor;
  return out;
}

Partition detect_blocks(const CovarianceReport& sigma, double threshold) {
  const auto& m = sigma.matrix;
  if (!m.is_square()) throw DimensionError("detect_blocks needs a square matrix");
  const int q = static_cast<int>(m.rows());
  std::vector<int> group(static_cast<std::size_t>(q), -1);
  Partition blocks;
  for (int start = 0; start < q; ++start) {
    if (group[start] >= 0) continue;
    const int id = static_cast<int>(blocks.size());
    blocks.emplace_back();
    std::vector<int> stack{start};
    group[start] = id;
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      blocks[id].push_back(j);
      for (int k = 0; k < q; ++k)
        if (group[k] < 0 && k != j && std::abs(m(j, k)) > threshold) {
          group[k] = id;
          stack.push_back(k);
        }
    }
    std::sort(blocks[id].begin(), blocks[id].end());
  }
  return blocks;
}

}  // namespace pairshap

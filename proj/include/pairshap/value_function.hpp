#ifndef PAIRSHAP_VALUE_FUNCTION_HPP
#define PAIRSHAP_VALUE_FUNCTION_HPP

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pairshap/coalition.hpp"

namespace pairshap {

enum class TermKind { linear, bilinear, exp_linear, exp_bilinear };

const char* to_string(TermKind kind);
TermKind term_kind_from_string(std::string_view name);

inline bool is_bilinear_kind(TermKind k) {
  return k == TermKind::bilinear || k == TermKind::exp_bilinear;
}

// One additive piece of a value function. It reads only the players in
// `indices` (0-based); the inner form is beta'z (linear kinds) or z'Az
// (bilinear kinds) over the sub-vector z = Z[indices].
struct Term {
  TermKind kind = TermKind::linear;
  std::vector<int> indices;
  std::vector<double> beta;  // linear kinds, size |indices|
  std::vector<double> a;     // bilinear kinds, row-major |indices| x |indices|
  double offset = 0.0;

  double inner(const Coalition& z) const;
  double evaluate(const Coalition& z) const;
};

struct ValueFunctionSpec {
  int q = 0;
  std::vector<Term> terms;

  // Throws SchemaError, DimensionError or DomainError.
  void validate() const;
  // nu_raw(Z): sum of term values, before normalization.
  double evaluate_raw(const Coalition& z) const;
};

// Parses the JSON value-function document:
//   { "q": int, "terms": [ { "kind": ..., "indices": [1-based ints],
//     "beta": [...] | "A": [[...], ...], "offset": num } ] }
ValueFunctionSpec parse_spec(std::string_view text);
ValueFunctionSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const ValueFunctionSpec& spec);
ValueFunctionSpec load_spec_file(const std::string& path);

// Evaluates the normalized game nu_0(Z) = nu_raw(Z) - nu_raw(empty) and
// counts calls. Immutable apart from the counter, so one evaluator can be
// shared by parallel replicates.
class GameEvaluator {
 public:
  using RawGame = std::function<double(const Coalition&)>;

  explicit GameEvaluator(ValueFunctionSpec spec);
  // Arbitrary games given as a callable on coalitions of size q.
  GameEvaluator(int q, RawGame raw);

  GameEvaluator(const GameEvaluator&) = delete;
  GameEvaluator& operator=(const GameEvaluator&) = delete;

  int q() const { return q_; }
  // nullptr for games built from a callable.
  const ValueFunctionSpec* spec() const { return spec_ ? &*spec_ : nullptr; }

  // Throws DimensionError on a q mismatch and NonFiniteError on overflow/NaN.
  double evaluate(const Coalition& z) const;
  double operator()(const Coalition& z) const { return evaluate(z); }

  std::uint64_t evaluations() const { return count_.load(std::memory_order_relaxed); }
  void reset_evaluations() { count_.store(0, std::memory_order_relaxed); }

 private:
  int q_;
  std::optional<ValueFunctionSpec> spec_;
  RawGame raw_;
  double raw_empty_;
  mutable std::atomic<std::uint64_t> count_{0};
};

}  // namespace pairshap

#endif  // PAIRSHAP_VALUE_FUNCTION_HPP

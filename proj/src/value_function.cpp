#include "pairshap/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pairshap/errors.hpp"

namespace pairshap {

using nlohmann::json;

const char* to_string(TermKind kind) {
  switch (kind) {
    case TermKind::linear: return "linear";
    case TermKind::bilinear: return "bilinear";
    case TermKind::exp_linear: return "exp_linear";
    case TermKind::exp_bilinear: return "exp_bilinear";
  }
  return "?";
}

TermKind term_kind_from_string(std::string_view name) {
  if (name == "linear") return TermKind::linear;
  if (name == "bilinear") return TermKind::bilinear;
  if (name == "exp_linear") return TermKind::exp_linear;
  if (name == "exp_bilinear") return TermKind::exp_bilinear;
  throw SchemaError("unknown term kind '" + std::string(name) + "'");
}

double Term::inner(const Coalition& z) const {
  const std::size_t m = indices.size();
  double s = 0.0;
  if (is_bilinear_kind(kind)) {
    for (std::size_t r = 0; r < m; ++r) {
      if (!z[indices[r]]) continue;
      const double* row = a.data() + r * m;
      for (std::size_t c = 0; c < m; ++c)
        if (z[indices[c]]) s += row[c];
    }
  } else {
    for (std::size_t k = 0; k < m; ++k)
      if (z[indices[k]]) s += beta[k];
  }
  return s;
}

double Term::evaluate(const Coalition& z) const {
  const double x = inner(z);
  if (kind == TermKind::exp_linear || kind == TermKind::exp_bilinear) return std::exp(x) + offset;
  return x + offset;
}

void ValueFunctionSpec::validate() const {
  if (q < 2) throw DomainError("value function needs q >= 2 players, got " + std::to_string(q));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const Term& term = terms[t];
    const std::string where = "term " + std::to_string(t + 1) + ": ";
    if (term.indices.empty()) throw SchemaError(where + "indices must be nonempty");
    std::set<int> seen;
    for (int j : term.indices) {
      if (j < 0 || j >= q)
        throw SchemaError(where + "index " + std::to_string(j + 1) + " outside 1.." + std::to_string(q));
      if (!seen.insert(j).second)
        throw SchemaError(where + "duplicate index " + std::to_string(j + 1));
    }
    const std::size_t m = term.indices.size();
    if (is_bilinear_kind(term.kind)) {
      if (term.a.size() != m * m)
        throw DimensionError(where + "A must be " + std::to_string(m) + "x" + std::to_string(m));
      if (!term.beta.empty()) throw SchemaError(where + "bilinear kinds take A, not beta");
    } else {
      if (term.beta.size() != m)
        throw DimensionError(where + "beta must have " + std::to_string(m) + " entries");
      if (!term.a.empty()) throw SchemaError(where + "linear kinds take beta, not A");
    }
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(term.beta.begin(), term.beta.end(), finite) ||
        !std::all_of(term.a.begin(), term.a.end(), finite) || !std::isfinite(term.offset))
      throw SchemaError(where + "parameters must be finite");
  }
}

double ValueFunctionSpec::evaluate_raw(const Coalition& z) const {
  double v = 0.0;
  for (const Term& term : terms) v += term.evaluate(z);
  return v;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw SchemaError(where + "unknown key '" + key + "'");
  }
}

std::vector<double> number_array(const json& v, const std::string& what) {
  if (!v.is_array()) throw SchemaError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw SchemaError(what + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

ValueFunctionSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("value-function document must be a JSON object");
  reject_unknown_keys(doc, {"q", "terms", "name"}, "");
  if (!doc.contains("q") || !doc["q"].is_number_integer())
    throw SchemaError("'q' must be an integer");
  if (!doc.contains("terms") || !doc["terms"].is_array())
    throw SchemaError("'terms' must be an array");

  ValueFunctionSpec spec;
  spec.q = doc["q"].get<int>();
  for (std::size_t t = 0; t < doc["terms"].size(); ++t) {
    const json& jt = doc["terms"][t];
    const std::string where = "term " + std::to_string(t + 1) + ": ";
    if (!jt.is_object()) throw SchemaError(where + "must be an object");
    reject_unknown_keys(jt, {"kind", "indices", "beta", "A", "offset"}, where);
    if (!jt.contains("kind") || !jt["kind"].is_string()) throw SchemaError(where + "'kind' must be a string");
    if (!jt.contains("indices") || !jt["indices"].is_array())
      throw SchemaError(where + "'indices' must be an array");

    Term term;
    term.kind = term_kind_from_string(jt["kind"].get<std::string>());
    for (const auto& idx : jt["indices"]) {
      if (!idx.is_number_integer()) throw SchemaError(where + "indices must be integers");
      term.indices.push_back(idx.get<int>() - 1);
    }
    if (jt.contains("beta")) term.beta = number_array(jt["beta"], where + "'beta'");
    if (jt.contains("A")) {
      const json& rows = jt["A"];
      if (!rows.is_array()) throw SchemaError(where + "'A' must be an array of rows");
      for (const auto& row : rows) {
        auto r = number_array(row, where + "rows of 'A'");
        if (r.size() != rows.size()) throw DimensionError(where + "'A' must be square");
        term.a.insert(term.a.end(), r.begin(), r.end());
      }
    }
    if (is_bilinear_kind(term.kind) && !jt.contains("A")) throw SchemaError(where + "missing 'A'");
    if (!is_bilinear_kind(term.kind) && !jt.contains("beta")) throw SchemaError(where + "missing 'beta'");
    if (jt.contains("offset")) {
      if (!jt["offset"].is_number()) throw SchemaError(where + "'offset' must be a number");
      term.offset = jt["offset"].get<double>();
    }
    spec.terms.push_back(std::move(term));
  }
  spec.validate();
  return spec;
}

ValueFunctionSpec parse_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed JSON: ") + e.what());
  }
  return spec_from_json(doc);
}

json spec_to_json(const ValueFunctionSpec& spec) {
  json terms = json::array();
  for (const Term& term : spec.terms) {
    json jt;
    jt["kind"] = to_string(term.kind);
    json idx = json::array();
    for (int j : term.indices) idx.push_back(j + 1);
    jt["indices"] = idx;
    if (is_bilinear_kind(term.kind)) {
      const std::size_t m = term.indices.size();
      json rows = json::array();
      for (std::size_t r = 0; r < m; ++r)
        rows.push_back(std::vector<double>(term.a.begin() + r * m, term.a.begin() + (r + 1) * m));
      jt["A"] = rows;
    } else {
      jt["beta"] = term.beta;
    }
    jt["offset"] = term.offset;
    terms.push_back(jt);
  }
  return json{{"q", spec.q}, {"terms", terms}};
}

ValueFunctionSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read value-function file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

GameEvaluator::GameEvaluator(ValueFunctionSpec spec) : q_(spec.q), spec_(std::move(spec)) {
  spec_->validate();
  raw_ = [s = &*spec_](const Coalition& z) { return s->evaluate_raw(z); };
  raw_empty_ = raw_(Coalition::empty(q_));
  if (!std::isfinite(raw_empty_)) throw NonFiniteError("value function is not finite at the empty coalition");
}

GameEvaluator::GameEvaluator(int q, RawGame raw) : q_(q), raw_(std::move(raw)) {
  if (q < 2) throw DomainError("value function needs q >= 2 players");
  raw_empty_ = raw_(Coalition::empty(q_));
  if (!std::isfinite(raw_empty_)) throw NonFiniteError("value function is not finite at the empty coalition");
}

double GameEvaluator::evaluate(const Coalition& z) const {
  if (z.q() != q_) throw DimensionError("coalition has " + std::to_string(z.q()) + " players, game has " + std::to_string(q_));
  count_.fetch_add(1, std::memory_order_relaxed);
  const double raw = raw_(z);
  if (!std::isfinite(raw)) throw NonFiniteError("value function overflowed at coalition " + z.to_string());
  return raw - raw_empty_;
}

}  // namespace pairshap

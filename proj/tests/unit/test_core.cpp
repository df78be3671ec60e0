#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "pairshap/coalition.hpp"
#include "pairshap/errors.hpp"
#include "pairshap/games.hpp"
#include "pairshap/random.hpp"
#include "pairshap/value_function.hpp"

using namespace pairshap;

TEST_SUITE("core") {
  TEST_CASE("coalition bit operations") {
    Coalition c = Coalition::from_players(5, std::vector<int>{0, 3});
    CHECK(c.q() == 5);
    CHECK(c.size() == 2);
    CHECK(c.contains(3));
    CHECK_FALSE(c.contains(1));
    CHECK(c.mask() == 0b01001u);
    CHECK(c.complement().mask() == 0b10110u);
    CHECK(c.with(1).size() == 3);
    CHECK(c.players() == std::vector<int>{0, 3});
    CHECK(Coalition::full(5).size() == 5);
    CHECK(Coalition::empty(5).size() == 0);
    CHECK(Coalition::from_mask(5, 0b01001u) == c);
  }

  TEST_CASE("complement is an involution") {
    for (std::uint64_t m = 0; m < 64; ++m) {
      const Coalition c = Coalition::from_mask(6, m);
      CHECK(c.complement().complement() == c);
      CHECK(c.size() + c.complement().size() == 6);
    }
  }

  TEST_CASE("permutation validation and reversal") {
    const Permutation pi(std::vector<int>{2, 0, 3, 1});
    CHECK(pi.position(2) == 0);
    CHECK(pi.position(1) == 3);
    CHECK(pi.reversed().order() == std::vector<int>{1, 3, 0, 2});
    CHECK(pi.prefix_coalition(3).players() == std::vector<int>{0, 2});
    CHECK(pi.prefix_coalition(2).size() == 0);
    CHECK_THROWS_AS(Permutation(std::vector<int>{0, 0, 1}), DomainError);
    CHECK_THROWS_AS(Permutation(std::vector<int>{0, 3}), DomainError);
  }

  TEST_CASE("seed derivation is deterministic and path sensitive") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
    CHECK(derive_seed(1, {0}) != derive_seed(1, {0, 0}));
  }

  TEST_CASE("uniform integers cover the range evenly") {
    Rng rng(7);
    std::vector<int> counts(6, 0);
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) ++counts[rng.below(6)];
    for (int c : counts) CHECK(std::abs(c - draws / 6) < 5 * std::sqrt(draws / 6.0));
  }

  TEST_CASE("normal draws have unit variance") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      sum += z;
      sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
  }

  TEST_CASE("rng streams replay exactly") {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform01() == b.uniform01());
  }
}

TEST_SUITE("value_function") {
  const char* kExample = R"({"q": 4, "terms": [{"kind": "exp_linear", "indices": [1,2,3,4],
                            "beta": [-0.5, 0.1, 0.8, -0.2], "offset": -1}]})";

  TEST_CASE("parses and evaluates a normalized game") {
    const GameEvaluator game(parse_spec(kExample));
    CHECK(game.q() == 4);
    CHECK(game.evaluate(Coalition(4)) == 0.0);
    CHECK(game.evaluate(Coalition::full(4)) == doctest::Approx(std::exp(0.2) - 1.0).epsilon(1e-14));
    CHECK(game.evaluate(Coalition::from_players(4, std::vector<int>{2})) ==
          doctest::Approx(std::exp(0.8) - 1.0).epsilon(1e-14));
  }

  TEST_CASE("offsets are removed by normalization") {
    auto spec = parse_spec(kExample);
    spec.terms[0].offset = 41.0;
    const GameEvaluator game(spec);
    CHECK(game.evaluate(Coalition(4)) == 0.0);
    CHECK(game.evaluate(Coalition::full(4)) == doctest::Approx(std::exp(0.2) - 1.0).epsilon(1e-12));
  }

  TEST_CASE("json round trip preserves values") {
    const auto spec = parse_spec(kExample);
    const auto again = spec_from_json(spec_to_json(spec));
    for (std::uint64_t m = 0; m < 16; ++m)
      CHECK(spec.evaluate_raw(Coalition::from_mask(4, m)) == again.evaluate_raw(Coalition::from_mask(4, m)));
  }

  TEST_CASE("bilinear terms read only their players") {
    linalg::Matrix a(2, 2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = -1.0;
    a(1, 1) = 3.0;
    ValueFunctionSpec spec;
    spec.q = 4;
    spec.terms.push_back(games::bilinear_term({1, 3}, a));
    const GameEvaluator game(spec);
    CHECK(game.evaluate(Coalition::from_players(4, std::vector<int>{1})) == 1.0);
    CHECK(game.evaluate(Coalition::from_players(4, std::vector<int>{1, 3})) == 5.0);
    CHECK(game.evaluate(Coalition::from_players(4, std::vector<int>{0, 2})) == 0.0);
  }

  TEST_CASE("schema errors") {
    CHECK_THROWS_AS(parse_spec("{not json"), SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3})"), SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [], "extra": 1})"), SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "cubic", "indices": [1], "beta": [1]}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "linear", "indices": [1, 1], "beta": [1, 2]}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "linear", "indices": [4], "beta": [1]}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "linear", "indices": [], "beta": []}]})"),
                    SchemaError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "bilinear", "indices": [1], "beta": [1]}]})"),
                    SchemaError);
  }

  TEST_CASE("dimension and domain errors") {
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "linear", "indices": [1, 2], "beta": [1]}]})"),
                    DimensionError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 3, "terms": [{"kind": "bilinear", "indices": [1, 2], "A": [[1]]}]})"),
                    DimensionError);
    CHECK_THROWS_AS(parse_spec(R"({"q": 1, "terms": []})"), DomainError);
  }

  TEST_CASE("overflow is a numerical error") {
    const GameEvaluator game(
        parse_spec(R"({"q": 2, "terms": [{"kind": "exp_linear", "indices": [1, 2], "beta": [800, 1]}]})"));
    CHECK_THROWS_AS(game.evaluate(Coalition::full(2)), NonFiniteError);
  }

  TEST_CASE("evaluations are counted and q is checked") {
    const GameEvaluator game(parse_spec(kExample));
    game.evaluate(Coalition::full(4));
    game.evaluate(Coalition(4));
    CHECK(game.evaluations() == 2);
    CHECK_THROWS_AS(game.evaluate(Coalition(3)), DimensionError);
  }

  TEST_CASE("callable games") {
    const GameEvaluator game(3, [](const Coalition& z) { return 10.0 + z.size(); });
    CHECK(game.spec() == nullptr);
    CHECK(game.evaluate(Coalition::full(3)) == 3.0);
  }
}

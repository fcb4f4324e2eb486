#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "support/fixture.hpp"
#include "support/oracle.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/json_io.hpp"

using namespace therafuzz;

namespace {

FuzzifiedInputs as_map(const std::vector<FuzzifiedValue>& values) {
  FuzzifiedInputs m;
  for (const auto& v : values) m.emplace(v.variable, v);
  return m;
}

std::vector<double> alphas(const ConsultationResult& r) {
  std::vector<double> out;
  for (const auto& f : r.firings) out.push_back(f.alpha);
  return out;
}

}  // namespace

TEST_CASE("firing strength is the min of clause degrees", "[inference]") {
  auto kb = fixture::kb();
  auto degrees = as_map(fixture::worked_degrees());

  auto r1 = firing_strength(kb.rules[0], degrees);
  CHECK(r1.alpha == 0.00);
  REQUIRE(r1.clause_degrees.size() == 3);
  CHECK(r1.clause_degrees[0] == ClauseDegree{"speech_problems_level", "high", 0.0});
  CHECK(r1.clause_degrees[1] == ClauseDegree{"child_age", "medium", 0.5});
  CHECK(r1.clause_degrees[2] == ClauseDegree{"family_implication", "reduce", 0.0});

  auto r3 = firing_strength(kb.rules[2], degrees);
  CHECK(r3.alpha == 0.37);
  CHECK(r3.consequent.term == "low");

  Rule single{"rx", {{"child_age", "small"}}, {"weekly_session_number", "low"}};
  CHECK(firing_strength(single, degrees).alpha == 0.25);
}

TEST_CASE("firing strength names the rule and clause when inputs are missing", "[inference]") {
  auto kb = fixture::kb();
  auto degrees = as_map(fixture::worked_degrees());
  degrees.erase("child_age");
  CHECK_THROWS_WITH(firing_strength(kb.rules[0], degrees),
                    Catch::Matchers::ContainsSubstring("r1") && Catch::Matchers::ContainsSubstring("child_age"));

  auto bad = as_map(fixture::worked_degrees());
  Rule r{"r9", {{"child_age", "tiny"}}, {"weekly_session_number", "low"}};
  CHECK_THROWS_WITH(firing_strength(r, bad), Catch::Matchers::ContainsSubstring("r9") &&
                                                 Catch::Matchers::ContainsSubstring("child_age is tiny"));
}

TEST_CASE("printed degree table replays exactly through min and max", "[inference]") {
  auto kb = fixture::kb();
  auto res = infer_fuzzified(kb, fixture::worked_degrees());
  CHECK(alphas(res) == std::vector<double>{0.00, 0.25, 0.37, 0.25, 0.50});
  CHECK(res.aggregate().alpha("high") == 0.00);
  CHECK(res.aggregate().alpha("low") == 0.37);
  CHECK(res.aggregate().alpha("normal") == 0.50);
  CHECK(std::abs(res.crisp_output() - fixture::kExactCentroidWorkedDegrees) / fixture::kExactCentroidWorkedDegrees <
        1e-3);
}

TEST_CASE("fixture consultation from crisp inputs", "[inference]") {
  auto kb = fixture::kb();
  auto res = infer(kb, fixture::worked_inputs());

  REQUIRE(res.fuzzified.size() == 3);
  CHECK(res.fuzzified[0].variable == "speech_problems_level");
  CHECK(*res.fuzzified[0].degree("low") == Catch::Approx(0.37).margin(0.015));
  CHECK(*res.fuzzified[0].degree("normal") == Catch::Approx(0.62).margin(0.015));
  CHECK(*res.fuzzified[2].degree("small") == 0.25);
  CHECK(*res.fuzzified[2].degree("medium") == 0.5);

  std::vector<double> printed = {0.00, 0.25, 0.37, 0.25, 0.50};
  auto got = alphas(res);
  for (std::size_t i = 0; i < printed.size(); ++i) CHECK(got[i] == Catch::Approx(printed[i]).margin(0.015));
  CHECK(res.aggregate().alpha("low") == Catch::Approx(0.37).margin(0.015));
  CHECK(res.aggregate().alpha("normal") == Catch::Approx(0.50).margin(0.015));
  CHECK(res.aggregate().alpha("high") == 0.0);

  using S = oracle::Shape;
  std::vector<oracle::ClippedTerm> terms = {{S{S::tri, {0, 1, 2}, {}}, res.aggregate().alpha("low")},
                                            {S{S::tri, {1, 2, 3}, {}}, res.aggregate().alpha("normal")},
                                            {S{S::tri, {2, 3, 4}, {}}, res.aggregate().alpha("high")}};
  double brute = oracle::centroid_10x(terms, 0, 4, 1001);
  CHECK(std::abs(res.crisp_output() - brute) / brute < 1e-3);
  CHECK(std::abs(res.crisp_output() - fixture::kExactCentroidFixtureInputs) < 1e-3);

  CHECK(res.recommendation.low_count == 1);
  CHECK(res.recommendation.high_count == 2);
  CHECK(res.recommendation.preferred == 2);
  CHECK(res.recommendation.note == "1 to 2 sessions per week (2 preferred)");
  CHECK(res.kb_revision == 0);
}

TEST_CASE("consultation input errors come before rule evaluation", "[inference]") {
  auto kb = fixture::kb();
  auto inputs = fixture::worked_inputs();
  inputs.erase("child_age");
  try {
    infer(kb, inputs);
    FAIL("expected ConsultationError");
  } catch (const ConsultationError& e) {
    CHECK(e.code() == "missing-input");
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("child_age"));
  }

  auto wild = fixture::worked_inputs();
  wild["child_age"] = 9;
  try {
    infer(kb, wild);
    FAIL("expected ConsultationError");
  } catch (const ConsultationError& e) {
    CHECK(e.code() == "out-of-range");
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("[3, 7]"));
  }
  CHECK_THROWS_AS(infer(kb, fixture::worked_inputs(), 1), ValidationError);
}

TEST_CASE("no rule fired is an error, not a default", "[inference]") {
  auto kb = fixture::kb();
  // speech level 0 -> only `low` at degree 0 ... every rule needs a nonzero level term
  Inputs none{{"speech_problems_level", 0.0}, {"family_implication", 4.0}, {"child_age", 7.0}};
  CHECK_THROWS_AS(infer(kb, none), NoRuleFired);
}

TEST_CASE("session interpretation", "[inference]") {
  auto a = interpret_sessions(1.62);
  CHECK(a == SessionRecommendation{1, 2, 2, "1 to 2 sessions per week (2 preferred)"});
  auto b = interpret_sessions(2.0);
  CHECK(b.low_count == 2);
  CHECK(b.high_count == 2);
  CHECK(b.preferred == 2);
  CHECK(interpret_sessions(1.5).preferred == 2);
  CHECK(interpret_sessions(1.49).preferred == 1);
  CHECK(interpret_sessions(0.0).note == "0 to 0 sessions per week (0 preferred)");
  CHECK_THROWS_AS(interpret_sessions(-0.1), DomainError);
  CHECK_THROWS_AS(interpret_sessions(std::nan("")), DomainError);
}

TEST_CASE("rule order does not change the conclusion", "[inference][property]") {
  auto kb = fixture::kb();
  auto base = infer(kb, fixture::worked_inputs());
  std::mt19937_64 rng(200);
  for (int i = 0; i < 200; ++i) {
    auto shuffled = kb;
    std::shuffle(shuffled.rules.begin(), shuffled.rules.end(), rng);
    auto r = infer(shuffled, fixture::worked_inputs());
    REQUIRE(r.aggregate().term_alphas() == base.aggregate().term_alphas());
    REQUIRE(r.crisp_output() == base.crisp_output());
    REQUIRE(r.recommendation == base.recommendation);
    for (std::size_t k = 0; k < r.firings.size(); ++k) REQUIRE(r.firings[k].rule_id == shuffled.rules[k].id);
  }
}

TEST_CASE("inputs no rule reads are ignored", "[inference][property]") {
  auto kb = fixture::kb();
  auto base = to_json(infer(kb, fixture::worked_inputs()));
  auto extra = fixture::worked_inputs();
  extra["shoe_size"] = 31;
  CHECK(to_json(infer(kb, extra)) == base);
}

TEST_CASE("raising a clause degree never lowers alphas or aggregates", "[inference][property]") {
  auto kb = fixture::kb();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    auto degrees = fixture::worked_degrees();
    for (auto& fv : degrees)
      for (auto& d : fv.degrees) d.degree = u(rng);
    degrees[0].degrees[0].degree = std::max(degrees[0].degrees[0].degree, 0.01);
    degrees[1].degrees[1].degree = 1.0;
    degrees[2].degrees[0].degree = std::max(degrees[2].degrees[0].degree, 0.01);
    auto before = infer_fuzzified(kb, degrees);
    auto& bumped = degrees[std::uniform_int_distribution<std::size_t>(0, 2)(rng)]
                       .degrees[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
    bumped.degree = std::min(1.0, bumped.degree + u(rng));
    auto after = infer_fuzzified(kb, degrees);
    for (std::size_t k = 0; k < before.firings.size(); ++k) REQUIRE(after.firings[k].alpha >= before.firings[k].alpha);
    for (std::size_t t = 0; t < 3; ++t)
      REQUIRE(after.aggregate().term_alphas()[t].degree >= before.aggregate().term_alphas()[t].degree);
  }
}

TEST_CASE("consultations are deterministic", "[inference]") {
  auto kb = fixture::kb();
  auto a = to_json(infer(kb, fixture::worked_inputs())).dump();
  auto b = to_json(infer(kb, fixture::worked_inputs())).dump();
  CHECK(a == b);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/aggregate.hpp"
#include "therafuzz/error.hpp"
#include "therafuzz/knowledge_base.hpp"
#include "therafuzz/variable.hpp"

namespace therafuzz {

using Inputs = std::map<std::string, double, std::less<>>;
using FuzzifiedInputs = std::map<std::string, FuzzifiedValue, std::less<>>;

struct ClauseDegree {
  std::string variable;
  std::string term;
  double degree = 0;

  friend bool operator==(const ClauseDegree&, const ClauseDegree&) = default;
};

struct RuleFiring {
  std::string rule_id;
  std::vector<ClauseDegree> clause_degrees;  // rule order
  double alpha = 0;                          // min of clause_degrees, exactly
  Clause consequent;
};

struct SessionRecommendation {
  int low_count = 0;
  int high_count = 0;
  int preferred = 0;
  std::string note;

  friend bool operator==(const SessionRecommendation&, const SessionRecommendation&) = default;
};

struct OutputConclusion {
  AggregatedOutputSet aggregate;
  double crisp = 0;
};

struct ConsultationResult {
  Inputs inputs;                         // only variables some rule reads
  std::vector<FuzzifiedValue> fuzzified;  // KB declaration order
  std::vector<RuleFiring> firings;        // KB rule order
  std::vector<OutputConclusion> outputs;  // one per output variable concluded by some rule
  SessionRecommendation recommendation;   // from the first output
  std::uint64_t kb_revision = 0;

  const AggregatedOutputSet& aggregate() const { return outputs.front().aggregate; }
  double crisp_output() const { return outputs.front().crisp; }
};

/// Whole weekly sessions bracketing a crisp output, preferring the nearest (halves round up).
inline SessionRecommendation interpret_sessions(double crisp_output) {
  if (!std::isfinite(crisp_output) || crisp_output < 0.0)
    throw DomainError("session count must be a finite non-negative number, got " + detail::shortest(crisp_output));
  SessionRecommendation rec;
  rec.low_count = static_cast<int>(std::floor(crisp_output));
  rec.high_count = static_cast<int>(std::ceil(crisp_output));
  rec.preferred = static_cast<int>(std::floor(crisp_output + 0.5));
  rec.note = std::to_string(rec.low_count) + " to " + std::to_string(rec.high_count) + " sessions per week (" +
             std::to_string(rec.preferred) + " preferred)";
  return rec;
}

inline RuleFiring firing_strength(const Rule& rule, const FuzzifiedInputs& fuzzified) {
  RuleFiring f{rule.id, {}, 1.0, rule.consequent};
  f.clause_degrees.reserve(rule.antecedents.size());
  for (const auto& c : rule.antecedents) {
    auto it = fuzzified.find(c.variable);
    if (it == fuzzified.end())
      throw ConsultationError("missing-input", "rule " + rule.id + ": no fuzzified value for '" + c.variable + "'");
    auto d = it->second.degree(c.term);
    if (!d)
      throw ConsultationError("unknown-term", "rule " + rule.id + ": clause (" + c.variable + " is " + c.term +
                                                  ") names a term the fuzzified value lacks");
    f.clause_degrees.push_back({c.variable, c.term, *d});
    f.alpha = std::min(f.alpha, *d);
  }
  if (rule.antecedents.empty()) f.alpha = 0.0;
  return f;
}

namespace detail {

inline std::vector<const LinguisticVariable*> referenced_inputs(const KnowledgeBase& kb) {
  std::vector<const LinguisticVariable*> out;
  for (const auto& v : kb.variables) {
    if (v.role() != VariableRole::input) continue;
    bool used = std::any_of(kb.rules.begin(), kb.rules.end(), [&](const Rule& r) {
      return std::any_of(r.antecedents.begin(), r.antecedents.end(),
                         [&](const Clause& c) { return c.variable == v.name(); });
    });
    if (used) out.push_back(&v);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

}  // namespace detail

/// Fires every rule on already-fuzzified inputs, max-aggregates per output term and
/// defuzzifies. This is the pipeline after fuzzification; `infer` feeds it from crisp inputs.
inline ConsultationResult infer_fuzzified(const KnowledgeBase& kb, std::span<const FuzzifiedValue> fuzzified,
                                          int resolution = kDefaultResolution) {
  if (resolution < 2) throw ValidationError("resolution must be at least 2", "bad-resolution");
  ConsultationResult res;
  res.kb_revision = kb.revision;

  FuzzifiedInputs by_name;
  for (const auto& fv : fuzzified) {
    by_name.insert_or_assign(fv.variable, fv);
    res.inputs[fv.variable] = fv.crisp;
    res.fuzzified.push_back(fv);
  }

  res.firings.reserve(kb.rules.size());
  for (const auto& r : kb.rules) res.firings.push_back(firing_strength(r, by_name));

  for (const auto& v : kb.variables) {
    if (v.role() != VariableRole::output) continue;
    std::vector<Contribution> contributions;
    for (const auto& f : res.firings)
      if (f.consequent.variable == v.name()) contributions.push_back({f.consequent.term, f.alpha});
    if (contributions.empty()) continue;
    auto set = aggregate(contributions, v);
    double crisp = defuzzify_centroid(set, resolution);
    res.outputs.push_back({std::move(set), crisp});
  }
  if (res.outputs.empty()) throw NoRuleFired("the knowledge base has no rule concluding an output variable");
  res.recommendation = interpret_sessions(res.outputs.front().crisp);
  return res;
}

/// Runs a full consultation. Inputs must cover every input variable some rule reads
/// and lie within its universe; both are checked before any rule is evaluated.
/// Inputs no rule reads are ignored.
inline ConsultationResult infer(const KnowledgeBase& kb, const Inputs& inputs, int resolution = kDefaultResolution) {
  if (resolution < 2) throw ValidationError("resolution must be at least 2", "bad-resolution");
  auto vars = detail::referenced_inputs(kb);

  std::vector<std::string> missing;
  for (const auto* v : vars)
    if (!inputs.count(v->name())) missing.push_back(v->name());
  if (!missing.empty()) throw ConsultationError("missing-input", "missing input(s): " + detail::join(missing));

  std::vector<FuzzifiedValue> fuzzified;
  std::vector<std::string> out_of_range;
  for (const auto* v : vars) {
    double x = inputs.find(v->name())->second;
    try {
      fuzzified.push_back(fuzzify(*v, x));
    } catch (const DomainError& e) {
      out_of_range.push_back(e.what());
    }
  }
  if (!out_of_range.empty()) throw ConsultationError("out-of-range", detail::join(out_of_range));

  return infer_fuzzified(kb, fuzzified, resolution);
}

}  // namespace therafuzz

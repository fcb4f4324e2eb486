#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "therafuzz/error.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/knowledge_base.hpp"
#include "therafuzz/parser.hpp"

namespace therafuzz {

using json = nlohmann::json;

inline json to_json(const Diagnostic& d) {
  return {{"severity", to_string(d.severity)},
          {"line", d.location.line},
          {"column", d.location.column},
          {"message", d.message},
          {"code", d.code}};
}

inline json to_json(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) out.push_back(to_json(d));
  return out;
}

inline json to_json(const FuzzifiedValue& fv) {
  json degrees = json::array();
  for (const auto& d : fv.degrees) degrees.push_back({{"term", d.term}, {"degree", d.degree}});
  return {{"variable", fv.variable}, {"crisp", fv.crisp}, {"degrees", degrees}, {"text", format_fuzzified(fv)}};
}

inline json to_json(const RuleFiring& f) {
  json clauses = json::array();
  for (const auto& c : f.clause_degrees)
    clauses.push_back({{"variable", c.variable}, {"term", c.term}, {"degree", c.degree}});
  return {{"rule_id", f.rule_id},
          {"clause_degrees", clauses},
          {"alpha", f.alpha},
          {"consequent", {{"variable", f.consequent.variable}, {"term", f.consequent.term}}}};
}

inline json to_json(const AggregatedOutputSet& set) {
  json alphas = json::array();
  for (const auto& a : set.term_alphas()) alphas.push_back({{"term", a.term}, {"alpha", a.degree}});
  return {{"variable", set.name()}, {"term_alphas", alphas}};
}

inline json to_json(const SessionRecommendation& r) {
  return {{"low_count", r.low_count}, {"high_count", r.high_count}, {"preferred", r.preferred}, {"note", r.note}};
}

/// Deterministic for a fixed result: arrays keep engine order, objects sort keys.
inline json to_json(const ConsultationResult& r) {
  json inputs = json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  json fuzzified = json::array();
  for (const auto& fv : r.fuzzified) fuzzified.push_back(to_json(fv));
  json firings = json::array();
  for (const auto& f : r.firings) firings.push_back(to_json(f));
  json outputs = json::array();
  for (const auto& o : r.outputs) outputs.push_back({{"aggregate", to_json(o.aggregate)}, {"crisp", o.crisp}});
  return {{"inputs", inputs},
          {"fuzzified", fuzzified},
          {"firings", firings},
          {"aggregate", to_json(r.aggregate())},
          {"crisp_output", r.crisp_output()},
          {"outputs", outputs},
          {"recommendation", to_json(r.recommendation)},
          {"kb_revision", r.kb_revision}};
}

inline json to_json(const MembershipFunction& mf) {
  json vertices = json::array();
  for (const auto& v : mf.vertices()) vertices.push_back({v.x, v.mu});
  return {{"text", render(mf)}, {"vertices", vertices}};
}

/// Variable definitions with vertex outlines, for clients that plot membership functions.
inline json to_json(const LinguisticVariable& v) {
  json terms = json::array();
  for (const auto& t : v.terms()) terms.push_back({{"name", t.name}, {"mf", to_json(t.mf)}});
  return {{"name", v.name()},
          {"role", to_string(v.role())},
          {"universe", {v.universe().lo(), v.universe().hi()}},
          {"terms", terms}};
}

inline json error_body(const std::string& code, const std::string& message,
                       const std::vector<Diagnostic>* diags = nullptr) {
  json body = {{"code", code}, {"message", message}};
  if (diags) body["diagnostics"] = to_json(*diags);
  return body;
}

}  // namespace therafuzz

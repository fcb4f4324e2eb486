#pragma once

#include <string>
#include <vector>

#include "therafuzz/detail/files.hpp"
#include "therafuzz/inference.hpp"
#include "therafuzz/store.hpp"

namespace fixture {

inline std::string document() {
  auto bytes = therafuzz::detail::read_file(THERAFUZZ_FIXTURE_KB);
  if (!bytes) throw std::runtime_error("missing fixture " + std::string(THERAFUZZ_FIXTURE_KB));
  return *bytes;
}

inline therafuzz::KnowledgeBase kb() {
  auto loaded = therafuzz::load(document());
  if (!loaded) throw std::runtime_error("fixture does not load");
  return std::move(*loaded.value);
}

inline therafuzz::Inputs worked_inputs() {
  return {{"speech_problems_level", 1.62}, {"family_implication", 2.00}, {"child_age", 4.50}};
}

/// The degree table printed in the worked example.
inline std::vector<therafuzz::FuzzifiedValue> worked_degrees() {
  return {
      {"speech_problems_level", 1.62, {{"low", 0.37}, {"normal", 0.62}, {"high", 0.0}}},
      {"family_implication", 2.00, {{"reduce", 0.0}, {"moderate", 1.0}, {"high", 0.0}}},
      {"child_age", 4.50, {{"small", 0.25}, {"medium", 0.5}, {"big", 0.0}}},
  };
}

/// The five worked-example rules as printed (with the `child_age` spelling).
inline const std::vector<std::string>& worked_rules() {
  static const std::vector<std::string> rules = {
      "IF (speech_problems_level is high) and (child_age is medium) and (family_implication is reduce) THEN "
      "weekly_session_number is high;",
      "IF (speech_problems_level is low) and (child_age is small) and (family_implication is moderate) THEN "
      "weekly_session_number is low;",
      "IF (speech_problems_level is low) and (child_age is medium) and (family_implication is moderate) THEN "
      "weekly_session_number is low;",
      "IF (speech_problems_level is normal) and (child_age is small) and (family_implication is moderate) THEN "
      "weekly_session_number is normal",
      "IF (speech_problems_level is normal) and (child_age is medium) and (family_implication is moderate) THEN "
      "weekly_session_number is normal",
  };
  return rules;
}

// Exact centroids of the fixture output set, integrated piecewise in rational
// arithmetic outside this code base.
inline constexpr double kExactCentroidFixtureInputs = 8811.0 / 5650.0;   // clip levels low .38, normal .5
inline constexpr double kExactCentroidWorkedDegrees = 35069.0 / 22400.0;  // clip levels low .37, normal .5

}  // namespace fixture

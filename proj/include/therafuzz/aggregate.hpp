#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "therafuzz/error.hpp"
#include "therafuzz/variable.hpp"

namespace therafuzz {

inline constexpr int kDefaultResolution = 1001;

struct Contribution {
  std::string term;
  double alpha = 0;
};

/// Output variable with one clipping level per term. Its membership at x is
/// max over terms of min(alpha, mu_term(x)).
class AggregatedOutputSet {
 public:
  AggregatedOutputSet(LinguisticVariable variable, std::vector<TermDegree> alphas)
      : variable_(std::move(variable)), alphas_(std::move(alphas)) {}

  const LinguisticVariable& variable() const noexcept { return variable_; }
  const std::string& name() const noexcept { return variable_.name(); }

  /// Clip levels in the variable's term declaration order.
  const std::vector<TermDegree>& term_alphas() const noexcept { return alphas_; }

  double alpha(std::string_view term) const noexcept {
    for (const auto& a : alphas_)
      if (a.term == term) return a.degree;
    return 0.0;
  }

  bool empty() const noexcept {
    return std::all_of(alphas_.begin(), alphas_.end(), [](const TermDegree& a) { return a.degree <= 0.0; });
  }

  double membership(double x) const noexcept {
    double mu = 0.0;
    const auto& terms = variable_.terms();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      double a = alphas_[i].degree;
      if (a <= 0.0) continue;
      mu = std::max(mu, std::min(a, terms[i].mf.degree(x)));
    }
    return mu;
  }

 private:
  LinguisticVariable variable_;
  std::vector<TermDegree> alphas_;
};

/// Max-combines rule contributions per output term; terms nobody contributed to get 0.
inline AggregatedOutputSet aggregate(std::span<const Contribution> contributions, const LinguisticVariable& variable) {
  std::vector<TermDegree> alphas;
  alphas.reserve(variable.terms().size());
  for (const auto& t : variable.terms()) alphas.push_back({t.name, 0.0});
  for (const auto& c : contributions) {
    auto idx = variable.term_index(c.term);
    if (!idx) throw ValidationError("'" + c.term + "' is not a term of '" + variable.name() + "'", "unknown-term");
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
      throw ValidationError("clip level for '" + c.term + "' must lie in [0,1], got " + detail::shortest(c.alpha),
                            "bad-alpha");
    alphas[*idx].degree = std::max(alphas[*idx].degree, c.alpha);
  }
  return AggregatedOutputSet(variable, std::move(alphas));
}

inline AggregatedOutputSet aggregate(std::initializer_list<Contribution> contributions,
                                     const LinguisticVariable& variable) {
  return aggregate(std::span<const Contribution>(contributions.begin(), contributions.size()), variable);
}

/// Center of gravity sampled at `resolution` evenly spaced points, endpoints included.
inline double defuzzify_centroid(const AggregatedOutputSet& set, int resolution = kDefaultResolution) {
  if (resolution < 2) throw ValidationError("resolution must be at least 2", "bad-resolution");
  if (set.empty()) throw NoRuleFired("no rule fired for '" + set.name() + "': every clip level is 0");
  const double lo = set.variable().universe().lo();
  const double width = set.variable().universe().width();
  const double steps = static_cast<double>(resolution - 1);
  double moment = 0.0;
  double mass = 0.0;
  for (int i = 0; i < resolution; ++i) {
    double x = i + 1 == resolution ? set.variable().universe().hi() : lo + width * (i / steps);
    double mu = set.membership(x);
    moment += x * mu;
    mass += mu;
  }
  if (!(mass > 0.0))
    throw NoRuleFired("aggregated set for '" + set.name() + "' has no mass at resolution " +
                      std::to_string(resolution));
  return std::clamp(moment / mass, lo, set.variable().universe().hi());
}

}  // namespace therafuzz

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "therafuzz/detail/numbers.hpp"
#include "therafuzz/error.hpp"

namespace therafuzz {

/// Closed numeric range a linguistic variable is defined over.
class Universe {
 public:
  Universe(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ValidationError("universe must satisfy lo < hi, got [" + detail::shortest(lo) + ", " +
                                detail::shortest(hi) + "]",
                            "bad-range");
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }

  friend bool operator==(const Universe&, const Universe&) = default;

 private:
  double lo_;
  double hi_;
};

struct Vertex {
  double x = 0;
  double mu = 0;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

struct Triangular {
  double a, b, c;
  friend bool operator==(const Triangular&, const Triangular&) = default;
};

struct Trapezoidal {
  double a, b, c, d;
  friend bool operator==(const Trapezoidal&, const Trapezoidal&) = default;
};

struct PiecewiseLinear {
  std::vector<Vertex> points;
  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;
};

/// Piecewise-linear membership function. Zero outside its support, which lets
/// shoulders such as tri(3,3,5) or trap(lo,lo,b,c) reach degree 1 at the bound.
class MembershipFunction {
 public:
  using Shape = std::variant<Triangular, Trapezoidal, PiecewiseLinear>;

  static MembershipFunction triangular(double a, double b, double c) {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) || !(a <= b && b <= c && a < c))
      throw ValidationError("triangular requires a <= b <= c and a < c, got (" + detail::shortest(a) + ", " +
                                detail::shortest(b) + ", " + detail::shortest(c) + ")",
                            "bad-mf");
    return MembershipFunction(Triangular{a, b, c});
  }

  static MembershipFunction trapezoidal(double a, double b, double c, double d) {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c) && std::isfinite(d)) ||
        !(a <= b && b <= c && c <= d && a < d))
      throw ValidationError("trapezoidal requires a <= b <= c <= d and a < d, got (" + detail::shortest(a) + ", " +
                                detail::shortest(b) + ", " + detail::shortest(c) + ", " + detail::shortest(d) +
                                ")",
                            "bad-mf");
    return MembershipFunction(Trapezoidal{a, b, c, d});
  }

  static MembershipFunction piecewise(std::vector<Vertex> points) {
    if (points.empty()) throw ValidationError("piecewise-linear function needs at least one point", "bad-mf");
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.x) || !(p.mu >= 0.0 && p.mu <= 1.0))
        throw ValidationError("piecewise-linear degree must lie in [0,1] at x=" + detail::shortest(p.x), "bad-mf");
      if (i > 0 && !(points[i - 1].x < p.x))
        throw ValidationError("piecewise-linear x coordinates must be strictly increasing", "bad-mf");
    }
    return MembershipFunction(PiecewiseLinear{std::move(points)});
  }

  const Shape& shape() const noexcept { return shape_; }

  double operator()(double x) const noexcept { return degree(x); }

  double degree(double x) const noexcept {
    return std::visit([x](const auto& s) { return eval(s, x); }, shape_);
  }

  /// Smallest and largest x where the function may be nonzero.
  double support_lo() const noexcept {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, PiecewiseLinear>)
            return s.points.front().x;
          else
            return s.a;
        },
        shape_);
  }

  double support_hi() const noexcept {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Triangular>)
            return s.c;
          else if constexpr (std::is_same_v<S, Trapezoidal>)
            return s.d;
          else
            return s.points.back().x;
        },
        shape_);
  }

  /// Vertex outline of the function over its support. Vertical edges at a
  /// shoulder appear as a single vertex at degree 1.
  std::vector<Vertex> vertices() const {
    return std::visit(
        [](const auto& s) -> std::vector<Vertex> {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Triangular>) {
            std::vector<Vertex> v;
            if (s.a < s.b) v.push_back({s.a, 0.0});
            v.push_back({s.b, 1.0});
            if (s.b < s.c) v.push_back({s.c, 0.0});
            return v;
          } else if constexpr (std::is_same_v<S, Trapezoidal>) {
            std::vector<Vertex> v;
            if (s.a < s.b) v.push_back({s.a, 0.0});
            v.push_back({s.b, 1.0});
            if (s.b < s.c) v.push_back({s.c, 1.0});
            if (s.c < s.d) v.push_back({s.d, 0.0});
            return v;
          } else {
            return s.points;
          }
        },
        shape_);
  }

  /// Same shape moved right by `delta`.
  MembershipFunction shifted(double delta) const {
    return std::visit(
        [delta](const auto& s) -> MembershipFunction {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, Triangular>) {
            return MembershipFunction(Triangular{s.a + delta, s.b + delta, s.c + delta});
          } else if constexpr (std::is_same_v<S, Trapezoidal>) {
            return MembershipFunction(Trapezoidal{s.a + delta, s.b + delta, s.c + delta, s.d + delta});
          } else {
            auto pts = s.points;
            for (auto& p : pts) p.x += delta;
            return MembershipFunction(PiecewiseLinear{std::move(pts)});
          }
        },
        shape_);
  }

  friend bool operator==(const MembershipFunction&, const MembershipFunction&) = default;

 private:
  explicit MembershipFunction(Shape s) : shape_(std::move(s)) {}

  static double eval(const Triangular& s, double x) noexcept {
    if (x < s.a || x > s.c) return 0.0;
    if (x <= s.b) return s.b == s.a ? 1.0 : (x - s.a) / (s.b - s.a);
    return s.c == s.b ? 1.0 : (s.c - x) / (s.c - s.b);
  }

  static double eval(const Trapezoidal& s, double x) noexcept {
    if (x < s.a || x > s.d) return 0.0;
    if (x < s.b) return (x - s.a) / (s.b - s.a);
    if (x <= s.c) return 1.0;
    return (s.d - x) / (s.d - s.c);
  }

  static double eval(const PiecewiseLinear& s, double x) noexcept {
    const auto& p = s.points;
    if (x < p.front().x || x > p.back().x) return 0.0;
    auto hi = std::upper_bound(p.begin(), p.end(), x, [](double v, const Vertex& q) { return v < q.x; });
    if (hi == p.end()) return p.back().mu;
    auto lo = std::prev(hi);
    double t = (x - lo->x) / (hi->x - lo->x);
    return std::clamp(lo->mu + t * (hi->mu - lo->mu), 0.0, 1.0);
  }

  Shape shape_;
};

}  // namespace therafuzz

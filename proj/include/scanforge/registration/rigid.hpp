#pragma once

#include <array>
#include <iosfwd>

namespace scanforge::reg {

using Point = std::array<double, 2>;

/// phi(x) = R(alpha) x + t.
struct RigidDeformation {
  double alpha = 0.0;
  Point t{0.0, 0.0};

  static RigidDeformation identity() { return {}; }

  Point operator()(Point x) const;
  std::array<double, 3> params() const { return {alpha, t[0], t[1]}; }
  static RigidDeformation from_params(const std::array<double, 3>& p) {
    return {p[0], {p[1], p[2]}};
  }

  friend bool operator==(const RigidDeformation&, const RigidDeformation&) = default;
};

/// apply(compose(outer, inner), x) == apply(outer, apply(inner, x)).
RigidDeformation compose(const RigidDeformation& outer, const RigidDeformation& inner);
RigidDeformation inverse(const RigidDeformation& phi);

/// max over Ω = [0,1]^2 of |a(x) - b(x)|; attained at a corner.
double max_displacement(const RigidDeformation& a, const RigidDeformation& b);

/// Sub-pixel equality: max_displacement(a, b) < tolerance.
bool approx_eq(const RigidDeformation& a, const RigidDeformation& b, double tolerance);

std::ostream& operator<<(std::ostream& out, const RigidDeformation& phi);

}  // namespace scanforge::reg

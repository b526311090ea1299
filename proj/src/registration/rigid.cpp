#include "scanforge/registration/rigid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace scanforge::reg {

Point RigidDeformation::operator()(Point x) const {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  return {c * x[0] - s * x[1] + t[0], s * x[0] + c * x[1] + t[1]};
}

RigidDeformation compose(const RigidDeformation& outer, const RigidDeformation& inner) {
  const double c = std::cos(outer.alpha);
  const double s = std::sin(outer.alpha);
  return {outer.alpha + inner.alpha,
          {c * inner.t[0] - s * inner.t[1] + outer.t[0],
           s * inner.t[0] + c * inner.t[1] + outer.t[1]}};
}

RigidDeformation inverse(const RigidDeformation& phi) {
  const double c = std::cos(phi.alpha);
  const double s = std::sin(phi.alpha);
  // R(-a) (y - t)
  return {-phi.alpha, {-(c * phi.t[0] + s * phi.t[1]), -(-s * phi.t[0] + c * phi.t[1])}};
}

double max_displacement(const RigidDeformation& a, const RigidDeformation& b) {
  double worst = 0.0;
  for (double x0 : {0.0, 1.0}) {
    for (double x1 : {0.0, 1.0}) {
      const Point pa = a({x0, x1});
      const Point pb = b({x0, x1});
      worst = std::max(worst, std::hypot(pa[0] - pb[0], pa[1] - pb[1]));
    }
  }
  return worst;
}

bool approx_eq(const RigidDeformation& a, const RigidDeformation& b, double tolerance) {
  return max_displacement(a, b) < tolerance;
}

std::ostream& operator<<(std::ostream& out, const RigidDeformation& phi) {
  return out << "{alpha=" << phi.alpha << ", t=(" << phi.t[0] << ", " << phi.t[1] << ")}";
}

}  // namespace scanforge::reg

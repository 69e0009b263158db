#pragma once

// Euclidean projection onto the branch-hull feasible set, one measurement at a
// time. For a measurement y with signs s = sign(y), t the set is
//   { (x, w, xi) : s (x + xi) w >= |y|, t w >= 0 }
// in the robust case and { (x, w) : s x w >= |y|, t w >= 0 } without slack.

#include "bhull/model.hpp"
#include "bhull/poly.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bhull {

struct HyperbolaBranch {
  double y = 0.0;
  int s = 0;
  int t = 1;

  static HyperbolaBranch from_measurement(double y, int t) {
    return HyperbolaBranch{y, sign_of(y), t}.validated();
  }

  HyperbolaBranch validated() const {
    if (!std::isfinite(y)) throw std::invalid_argument("HyperbolaBranch: y not finite");
    if (s != sign_of(y)) throw std::invalid_argument("HyperbolaBranch: s must equal sign(y)");
    if (t != 1 && t != -1) throw std::invalid_argument("HyperbolaBranch: t must be +-1");
    return *this;
  }
};

// Which KKT case of the projection program produced the point.
enum class ProjectionCase {
  Feasible = 1,    // input already in the set
  SignClamp = 2,   // y = 0: only t w >= 0 active
  Boundary = 4,    // hyperbola constraint active
};

template <int Dim>
struct Projected {
  Eigen::Matrix<double, Dim, 1> point;
  ProjectionCase kkt_case = ProjectionCase::Feasible;
  double multiplier = 0.0;  // mu for the hyperbola constraint
};

namespace proj_detail {

inline constexpr double kMinAbsW = 1e-12;

// Shared solve for both set shapes. `fold` is the number of coordinates that
// move with slope mu s w (1 for (x, w), 2 for (x, w, xi)) and `offset` is the
// sum of those coordinates at the input. Returns w and mu at the touching
// point on s * offset' * w = |y|.
struct BoundaryPoint {
  double w;
  double mu;
  double distance2;
};

inline BoundaryPoint solve_boundary(double offset, double w0, const HyperbolaBranch& b,
                                    int fold) {
  const double ay = std::abs(b.y);
  // fold w^4 - fold w0 w^3 + s |y| offset w - y^2 = 0
  const Quartic q{static_cast<double>(fold), -fold * w0, 0.0, b.s * ay * offset,
                  -b.y * b.y};
  const QuarticRoots roots = real_roots(q);
  BoundaryPoint best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (const RealRoot& r : roots.real()) {
    const double w = r.value;
    if (std::abs(w) < kMinAbsW || b.t * w < 0.0) continue;
    const double gap = ay - b.s * offset * w;
    if (gap < -1e-12 * (ay + std::abs(offset * w))) continue;
    const double mu = std::max(gap, 0.0) / (fold * w * w);
    // Each folded coordinate moves by mu s w; w moves to its root.
    const double shift = mu * w;
    const double d2 = fold * shift * shift + (w - w0) * (w - w0);
    if (d2 < best.distance2) best = {w, mu, d2};
  }
  if (!std::isfinite(best.distance2))
    throw std::runtime_error("projection: no admissible real root");
  return best;
}

}  // namespace proj_detail

inline Projected<3> project3(const Eigen::Vector3d& point, const HyperbolaBranch& b) {
  const double x0 = point[0], w0 = point[1], xi0 = point[2];
  Projected<3> out;
  out.point = point;
  if (b.y == 0.0) {
    if (b.t * w0 < 0.0) {
      out.point[1] = 0.0;
      out.kkt_case = ProjectionCase::SignClamp;
    }
    return out;
  }
  const double offset = x0 + xi0;
  if (b.s * offset * w0 >= std::abs(b.y) && b.t * w0 >= 0.0) return out;

  const auto bp = proj_detail::solve_boundary(offset, w0, b, 2);
  const double move = bp.mu * b.s * bp.w;
  out.point = {x0 + move, bp.w, xi0 + move};
  out.kkt_case = ProjectionCase::Boundary;
  out.multiplier = bp.mu;
  return out;
}

inline Projected<2> project2(const Eigen::Vector2d& point, const HyperbolaBranch& b) {
  const double x0 = point[0], w0 = point[1];
  Projected<2> out;
  out.point = point;
  if (b.y == 0.0) {
    if (b.t * w0 < 0.0) {
      out.point[1] = 0.0;
      out.kkt_case = ProjectionCase::SignClamp;
    }
    return out;
  }
  if (b.s * x0 * w0 >= std::abs(b.y) && b.t * w0 >= 0.0) return out;

  const auto bp = proj_detail::solve_boundary(x0, w0, b, 1);
  out.point = {x0 + bp.mu * b.s * bp.w, bp.w};
  out.kkt_case = ProjectionCase::Boundary;
  out.multiplier = bp.mu;
  return out;
}

// Projects a stacked vector (x; w; xi) of length 3L, or (x; w) of length 2L
// when `with_slack` is false, coordinate by coordinate.
inline Vector project_set(const Vector& points, const ProblemInstance& instance,
                          bool with_slack = true) {
  const Eigen::Index L = instance.L();
  const Eigen::Index blocks = with_slack ? 3 : 2;
  if (points.size() != blocks * L)
    throw std::invalid_argument("project_set: expected a stacked vector of length 3L or 2L");
  Vector out(points.size());
  for (Eigen::Index l = 0; l < L; ++l) {
    const HyperbolaBranch b{instance.y()[l], static_cast<int>(instance.s()[l]),
                            static_cast<int>(instance.t()[l])};
    if (with_slack) {
      const auto p = project3({points[l], points[L + l], points[2 * L + l]}, b).point;
      out[l] = p[0];
      out[L + l] = p[1];
      out[2 * L + l] = p[2];
    } else {
      const auto p = project2({points[l], points[L + l]}, b).point;
      out[l] = p[0];
      out[L + l] = p[1];
    }
  }
  return out;
}

}  // namespace bhull

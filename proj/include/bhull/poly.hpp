#pragma once

// Real roots of polynomials of degree <= 4.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>

namespace bhull {

// a4 w^4 + a3 w^3 + a2 w^2 + a1 w + a0
struct Quartic {
  double a4 = 0.0, a3 = 0.0, a2 = 0.0, a1 = 0.0, a0 = 0.0;

  double operator()(double w) const {
    return (((a4 * w + a3) * w + a2) * w + a1) * w + a0;
  }
  double derivative(double w) const {
    return ((4.0 * a4 * w + 3.0 * a3) * w + 2.0 * a2) * w + a1;
  }
  double second_derivative(double w) const {
    return (12.0 * a4 * w + 6.0 * a3) * w + 2.0 * a2;
  }
  double max_abs_coefficient() const {
    return std::max({std::abs(a4), std::abs(a3), std::abs(a2), std::abs(a1),
                     std::abs(a0)});
  }
  std::array<double, 5> coefficients() const { return {a0, a1, a2, a3, a4}; }
};

struct RealRoot {
  double value = 0.0;
  int multiplicity = 1;
};

struct QuarticRoots {
  std::array<RealRoot, 4> storage{};
  int count = 0;          // distinct real roots
  int complex_count = 0;  // non-real roots, with multiplicity
  int degree = 0;

  std::span<const RealRoot> real() const { return {storage.data(), static_cast<size_t>(count)}; }
  int real_count_with_multiplicity() const {
    int n = 0;
    for (const auto& r : real()) n += r.multiplicity;
    return n;
  }
};

namespace poly_detail {

inline constexpr double kImagThreshold = 1e-9;
// Conjugate pairs this close to the real axis are tested as a perturbed
// double root.
inline constexpr double kNearDoubleImag = 1e-4;
inline constexpr double kMergeThreshold = 1e-6;

inline double polish(const Quartic& q, double w, int steps) {
  double best = w, best_res = std::abs(q(w));
  for (int i = 0; i < steps && best_res > 0.0; ++i) {
    const double d = q.derivative(best);
    if (d == 0.0) break;
    const double next = best - q(best) / d;
    const double res = std::abs(q(next));
    if (!(res < best_res)) break;
    best = next;
    best_res = res;
  }
  return best;
}

// Newton iteration on q' from w: the local extremum of q next to a nearly
// double root.
inline double stationary_point(const Quartic& q, double w) {
  for (int i = 0; i < 8; ++i) {
    const double d2 = q.second_derivative(w);
    if (d2 == 0.0) break;
    const double step = q.derivative(w) / d2;
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

}  // namespace poly_detail

// All real roots of q, ascending, merged with multiplicity. Roots come from
// the eigenvalues of the companion matrix and are Newton polished. A nearly
// real conjugate pair whose real part is a stationary point with residual
// under the tolerance is reported as a double root.
inline QuarticRoots real_roots(const Quartic& q, double tol = 1e-10) {
  using namespace poly_detail;
  const auto c = q.coefficients();
  for (double v : c)
    if (!std::isfinite(v))
      throw std::invalid_argument("real_roots: non-finite coefficient");
  int degree = 4;
  while (degree >= 0 && c[degree] == 0.0) --degree;
  if (degree < 0) throw std::invalid_argument("real_roots: zero polynomial");

  QuarticRoots out;
  out.degree = degree;
  if (degree == 0) return out;

  using Companion = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
  Companion comp = Companion::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) comp(i, degree - 1) = -c[i] / c[degree];

  std::array<std::complex<double>, 4> eig;
  if (degree == 1) {
    eig[0] = comp(0, 0);
  } else {
    Eigen::EigenSolver<Companion> solver(comp, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("real_roots: eigenvalue iteration failed");
    for (int i = 0; i < degree; ++i) eig[i] = solver.eigenvalues()[i];
  }

  const double scale = std::max(1.0, q.max_abs_coefficient());
  std::array<RealRoot, 4> found{};
  int nfound = 0;
  for (int i = 0; i < degree; ++i) {
    const double re = eig[i].real(), im = eig[i].imag();
    if (std::abs(im) <= kImagThreshold * (1.0 + std::abs(re))) {
      found[nfound++] = {polish(q, re, 3), 1};
    } else if (im > 0.0) {
      const double w = stationary_point(q, re);
      if (std::abs(im) <= kNearDoubleImag * (1.0 + std::abs(re)) &&
          std::abs(w - re) <= kNearDoubleImag * (1.0 + std::abs(re)) &&
          std::abs(q(w)) <= tol * scale) {
        found[nfound++] = {w, 2};
      } else {
        out.complex_count += 2;
      }
    }
  }

  std::sort(found.begin(), found.begin() + nfound,
            [](const RealRoot& a, const RealRoot& b) { return a.value < b.value; });
  for (int i = 0; i < nfound; ++i) {
    if (out.count > 0) {
      RealRoot& last = out.storage[out.count - 1];
      if (std::abs(found[i].value - last.value) <=
          kMergeThreshold * (1.0 + std::abs(last.value))) {
        if (std::abs(q(found[i].value)) < std::abs(q(last.value)))
          last.value = found[i].value;
        last.multiplicity += found[i].multiplicity;
        continue;
      }
    }
    out.storage[out.count++] = found[i];
  }
  return out;
}

}  // namespace bhull

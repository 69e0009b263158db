#pragma once

// Core types for the sparse bilinear inverse problem y = (B h) .* (C m) with
// known signs s = sign(y), t = sign(B h).

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bhull/tv.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace bhull {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// A real matrix stored either densely or sparsely. Dictionaries and structure
// matrices are dense in general; identity and difference operators are kept
// sparse so imaging-sized problems stay tractable.
class LinearOperator {
 public:
  LinearOperator() : rep_(Matrix(0, 0)) {}
  LinearOperator(Matrix dense) : rep_(std::move(dense)) {}
  LinearOperator(SparseMatrix sparse) : rep_(std::move(sparse)) {
    std::get<SparseMatrix>(rep_).makeCompressed();
  }

  static LinearOperator identity(Eigen::Index n) {
    SparseMatrix eye(n, n);
    eye.setIdentity();
    return LinearOperator(std::move(eye));
  }

  Eigen::Index rows() const {
    return std::visit([](const auto& a) { return a.rows(); }, rep_);
  }
  Eigen::Index cols() const {
    return std::visit([](const auto& a) { return a.cols(); }, rep_);
  }
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(rep_); }

  const Matrix& dense() const { return std::get<Matrix>(rep_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(rep_); }

  Vector apply(const Vector& x) const {
    if (x.size() != cols())
      throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
    return std::visit([&](const auto& a) -> Vector { return a * x; }, rep_);
  }

  Vector apply_transpose(const Vector& y) const {
    if (y.size() != rows())
      throw std::invalid_argument(
          "LinearOperator::apply_transpose: dimension mismatch");
    return std::visit(
        [&](const auto& a) -> Vector { return a.transpose() * y; }, rep_);
  }

  Matrix to_dense() const {
    if (is_sparse()) return Matrix(sparse());
    return dense();
  }

  double frobenius_norm() const {
    return std::visit([](const auto& a) { return a.norm(); }, rep_);
  }

  // this * rhs, sparse only when both factors are sparse.
  LinearOperator compose(const LinearOperator& rhs) const {
    if (cols() != rhs.rows())
      throw std::invalid_argument("LinearOperator::compose: dimension mismatch");
    if (is_sparse() && rhs.is_sparse())
      return LinearOperator(SparseMatrix(sparse() * rhs.sparse()));
    if (is_sparse()) return LinearOperator(Matrix(sparse() * rhs.dense()));
    if (rhs.is_sparse()) return LinearOperator(Matrix(dense() * rhs.sparse()));
    return LinearOperator(Matrix(dense() * rhs.dense()));
  }

 private:
  std::variant<Matrix, SparseMatrix> rep_;
};

struct GroundTruth {
  Vector h;
  Vector m;
};

// Dictionaries, measurements and sign information. Immutable once built; the
// constructor derives s = sign(y) and checks every invariant.
class ProblemInstance {
 public:
  ProblemInstance(LinearOperator B, LinearOperator C, Vector y, Vector t,
                  std::optional<GroundTruth> truth = std::nullopt)
      : B_(std::move(B)),
        C_(std::move(C)),
        y_(std::move(y)),
        t_(std::move(t)),
        truth_(std::move(truth)) {
    const auto L = y_.size();
    if (L == 0) throw std::invalid_argument("ProblemInstance: empty y");
    if (B_.rows() != L || C_.rows() != L || t_.size() != L)
      throw std::invalid_argument(
          "ProblemInstance: B, C, y and t must share the row count L");
    s_.resize(L);
    for (Eigen::Index l = 0; l < L; ++l) {
      if (!std::isfinite(y_[l]))
        throw std::invalid_argument("ProblemInstance: non-finite measurement");
      if (t_[l] != 1.0 && t_[l] != -1.0)
        throw std::invalid_argument("ProblemInstance: t entries must be +-1");
      s_[l] = sign_of(y_[l]);
    }
    if (truth_) {
      if (truth_->h.size() != B_.cols() || truth_->m.size() != C_.cols())
        throw std::invalid_argument("ProblemInstance: truth dimension mismatch");
      const Vector w = B_.apply(truth_->h);
      const Vector x = C_.apply(truth_->m);
      const double err = (y_ - w.cwiseProduct(x)).norm();
      if (err > 1e-12 * std::max(1.0, y_.norm()))
        throw std::invalid_argument(
            "ProblemInstance: y does not equal (B h) .* (C m) for the truth");
      for (Eigen::Index l = 0; l < L; ++l)
        if (w[l] != 0.0 && sign_of(w[l]) != static_cast<int>(t_[l]))
          throw std::invalid_argument(
              "ProblemInstance: t disagrees with sign(B h) for the truth");
    }
  }

  const LinearOperator& B() const { return B_; }
  const LinearOperator& C() const { return C_; }
  const Vector& y() const { return y_; }
  const Vector& s() const { return s_; }
  const Vector& t() const { return t_; }
  const std::optional<GroundTruth>& truth() const { return truth_; }

  Eigen::Index L() const { return y_.size(); }
  Eigen::Index K() const { return B_.cols(); }
  Eigen::Index N() const { return C_.cols(); }

 private:
  LinearOperator B_;
  LinearOperator C_;
  Vector y_;
  Vector s_;
  Vector t_;
  std::optional<GroundTruth> truth_;
};

enum class Mode { Noiseless, Robust, TV };

inline std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Noiseless: return "noiseless";
    case Mode::Robust: return "robust";
    case Mode::TV: return "tv";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& name) {
  if (name == "noiseless") return Mode::Noiseless;
  if (name == "robust") return Mode::Robust;
  if (name == "tv") return Mode::TV;
  throw std::invalid_argument("unknown mode: " + name);
}

// Structure matrix P in the objective ||P h||_1.
struct IdentityP {};
// P = D B with D the image difference operator for a p x q image.
struct TvOfB {
  int rows = 0;
  int cols = 0;
};
struct ExplicitP {
  LinearOperator matrix;
};
using PMatrixSpec = std::variant<IdentityP, TvOfB, ExplicitP>;

struct SolverConfig {
  Mode mode = Mode::Robust;
  double lambda = 1e3;
  double rho = 1.0;
  int max_iters = 10000;
  double tol_primal = 1e-10;
  double tol_dual = 1e-10;
  PMatrixSpec p_matrix = IdentityP{};

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw std::invalid_argument("SolverConfig: lambda must be positive");
    if (!(rho > 0.0) || !std::isfinite(rho))
      throw std::invalid_argument("SolverConfig: rho must be positive");
    if (max_iters < 1)
      throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0))
      throw std::invalid_argument("SolverConfig: tolerances must be positive");
    if (mode == Mode::Noiseless && !std::holds_alternative<IdentityP>(p_matrix))
      throw std::invalid_argument("SolverConfig: noiseless mode uses P = I");
    if (mode == Mode::TV && std::holds_alternative<IdentityP>(p_matrix))
      throw std::invalid_argument(
          "SolverConfig: TV mode needs a TV-of-B or explicit P matrix");
    if (const auto* tv = std::get_if<TvOfB>(&p_matrix);
        tv && (tv->rows < 2 || tv->cols < 2))
      throw std::invalid_argument("SolverConfig: TV image must be at least 2x2");
  }
};

struct Solution {
  Vector h_hat;
  Vector m_hat;
  Vector xi_hat;  // empty in noiseless mode
  double objective = 0.0;
  int iters_used = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
};

struct BalancedPoint {
  Vector h_tilde;
  Vector m_tilde;
};

// Rescales (h, m) to (c h, m / c) with c = sqrt(|m|_1 / |h|_1), the member of
// the scaling orbit with equal l1 norms.
inline BalancedPoint balanced_scaling(const Vector& h, const Vector& m) {
  const double nh = h.lpNorm<1>();
  const double nm = m.lpNorm<1>();
  if (!(nh > 0.0) || !(nm > 0.0))
    throw std::invalid_argument("balanced_scaling: zero l1 norm");
  return {h * std::sqrt(nm / nh), m * std::sqrt(nh / nm)};
}

inline double objective(const Vector& h, const Vector& m, const Vector& xi,
                        const LinearOperator& P, Mode mode, double lambda) {
  if (mode == Mode::Noiseless) return h.lpNorm<1>() + m.lpNorm<1>();
  if (P.cols() != h.size())
    throw std::invalid_argument("objective: P does not match h");
  return P.apply(h).lpNorm<1>() + m.lpNorm<1>() + lambda * xi.lpNorm<1>();
}

// Resolves the P matrix of a configuration against an instance (TV-of-B needs
// B and the image shape).
inline LinearOperator resolve_p_matrix(const SolverConfig& config,
                                       const ProblemInstance& instance) {
  if (std::holds_alternative<IdentityP>(config.p_matrix))
    return LinearOperator::identity(instance.K());
  if (const auto* tv = std::get_if<TvOfB>(&config.p_matrix)) {
    if (static_cast<Eigen::Index>(tv->rows) * tv->cols != instance.L())
      throw std::invalid_argument(
          "resolve_p_matrix: image shape does not match L");
    const TVStructure structure = make_tv_structure(tv->rows, tv->cols);
    return LinearOperator(structure.D).compose(instance.B());
  }
  const auto& P = std::get<ExplicitP>(config.p_matrix).matrix;
  if (P.cols() != instance.K())
    throw std::invalid_argument("resolve_p_matrix: P must have K columns");
  return P;
}

inline double objective(const Vector& h, const Vector& m, const Vector& xi,
                        const SolverConfig& config) {
  if (std::holds_alternative<TvOfB>(config.p_matrix))
    throw std::invalid_argument("objective: TV-of-B needs the instance");
  LinearOperator P = std::holds_alternative<ExplicitP>(config.p_matrix)
                         ? std::get<ExplicitP>(config.p_matrix).matrix
                         : LinearOperator::identity(h.size());
  return objective(h, m, xi, P, config.mode, config.lambda);
}

inline double objective(const Vector& h, const Vector& m, const Vector& xi,
                        const SolverConfig& config,
                        const ProblemInstance& instance) {
  return objective(h, m, xi, resolve_p_matrix(config, instance), config.mode,
                   config.lambda);
}

// Largest violation of s (xi + c^T m)(b^T h) >= |y| and t b^T h >= 0 over all
// measurements. An empty xi means xi = 0.
inline double feasibility_violation(const Vector& h, const Vector& m,
                                    const Vector& xi,
                                    const ProblemInstance& instance) {
  if (h.size() != instance.K() || m.size() != instance.N() ||
      (xi.size() != 0 && xi.size() != instance.L()))
    throw std::invalid_argument("feasibility_violation: dimension mismatch");
  const Vector w = instance.B().apply(h);
  const Vector x = instance.C().apply(m);
  double worst = 0.0;
  for (Eigen::Index l = 0; l < instance.L(); ++l) {
    const double shift = xi.size() ? xi[l] : 0.0;
    const double hyper = std::abs(instance.y()[l]) -
                         instance.s()[l] * (shift + x[l]) * w[l];
    worst = std::max({worst, hyper, -instance.t()[l] * w[l]});
  }
  return worst;
}

}  // namespace bhull

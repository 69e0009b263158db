#pragma once

// Scaled ADMM for
//   minimize ||P h||_1 + ||m||_1 + lambda ||xi||_1
//   subject to s_l (xi_l + c_l^T m) b_l^T h >= |y_l|,  t_l b_l^T h >= 0.
//
// With z = (m, h, lambda xi), u = E z = (C m, B h, xi) and v = Q z =
// (m, P h, lambda xi), the iteration is
//   u <- proj_C(E z - alpha)
//   v <- S_{1/rho}(Q z - beta)
//   z <- (E^T E + Q^T Q)^{-1} (E^T (alpha + u) + Q^T (beta + v))
//   alpha <- alpha + u - E z,  beta <- beta + v - Q z.
// The noiseless program drops the xi blocks and uses P = I.

#include "bhull/model.hpp"
#include "bhull/proj.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <variant>

namespace bhull {

inline Vector soft_threshold(const Vector& v, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("soft_threshold: threshold must be positive");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double vi = v[i];
    out[i] = vi > c ? vi - c : (vi < -c ? vi + c : 0.0);
  }
  return out;
}

// Cholesky factor of A^T A + G^T G, sparse when both operands are sparse.
class SpdBlock {
 public:
  SpdBlock(const LinearOperator& A, const LinearOperator& G) {
    if (A.cols() != G.cols()) throw std::invalid_argument("SpdBlock: column mismatch");
    if (A.is_sparse() && G.is_sparse()) {
      SparseMatrix gram = SparseMatrix(A.sparse().transpose() * A.sparse()) +
                          SparseMatrix(G.sparse().transpose() * G.sparse());
      auto llt = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(gram);
      if (llt->info() != Eigen::Success)
        throw std::runtime_error("SpdBlock: sparse Cholesky failed (block not SPD)");
      gram_ = std::move(gram);
      factor_ = std::move(llt);
    } else {
      const Matrix a = A.to_dense(), g = G.to_dense();
      Matrix gram = a.transpose() * a;
      gram.noalias() += g.transpose() * g;
      auto llt = std::make_unique<Eigen::LLT<Matrix>>(gram);
      if (llt->info() != Eigen::Success)
        throw std::runtime_error("SpdBlock: dense Cholesky failed (block not SPD)");
      gram_ = std::move(gram);
      factor_ = std::move(llt);
    }
  }

  Eigen::Index size() const {
    return std::visit([](const auto& g) { return g.rows(); }, gram_);
  }

  Vector solve(const Vector& rhs) const {
    return std::visit([&](const auto& f) -> Vector { return f->solve(rhs); }, factor_);
  }

  Vector apply(const Vector& x) const {
    return std::visit([&](const auto& g) -> Vector { return g * x; }, gram_);
  }

  Matrix dense() const {
    return std::visit([](const auto& g) { return Matrix(g); }, gram_);
  }

 private:
  std::variant<Matrix, SparseMatrix> gram_;
  std::variant<std::unique_ptr<Eigen::LLT<Matrix>>,
               std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>>>
      factor_;
};

// E, Q and the factored block diagonal of M = E^T E + Q^T Q:
//   blockdiag(C^T C + I_N, B^T B + P^T P, (lambda^-2 + 1) I_L).
// Holds a reference to the instance, which must outlive it.
class SplitOperators {
 public:
  SplitOperators(const ProblemInstance& instance, const SolverConfig& config)
      : instance_(&instance),
        with_slack_(config.mode != Mode::Noiseless),
        lambda_(config.lambda),
        P_(resolve_p_matrix(config, instance)),
        m_block_(instance.C(), LinearOperator::identity(instance.N())),
        h_block_(instance.B(), P_),
        xi_diag_(1.0 / (config.lambda * config.lambda) + 1.0) {}

  Eigen::Index L() const { return instance_->L(); }
  Eigen::Index K() const { return instance_->K(); }
  Eigen::Index N() const { return instance_->N(); }
  Eigen::Index J() const { return P_.rows(); }
  bool with_slack() const { return with_slack_; }
  double lambda() const { return lambda_; }
  const LinearOperator& P() const { return P_; }

  Eigen::Index z_size() const { return N() + K() + (with_slack_ ? L() : 0); }
  Eigen::Index u_size() const { return (with_slack_ ? 3 : 2) * L(); }
  Eigen::Index v_size() const { return N() + J() + (with_slack_ ? L() : 0); }

  Vector apply_E(const Vector& z) const {
    Vector u(u_size());
    u.segment(0, L()) = instance_->C().apply(z.segment(0, N()));
    u.segment(L(), L()) = instance_->B().apply(z.segment(N(), K()));
    if (with_slack_) u.segment(2 * L(), L()) = z.segment(N() + K(), L()) / lambda_;
    return u;
  }

  Vector apply_Et(const Vector& u) const {
    Vector z(z_size());
    z.segment(0, N()) = instance_->C().apply_transpose(u.segment(0, L()));
    z.segment(N(), K()) = instance_->B().apply_transpose(u.segment(L(), L()));
    if (with_slack_) z.segment(N() + K(), L()) = u.segment(2 * L(), L()) / lambda_;
    return z;
  }

  Vector apply_Q(const Vector& z) const {
    Vector v(v_size());
    v.segment(0, N()) = z.segment(0, N());
    v.segment(N(), J()) = P_.apply(z.segment(N(), K()));
    if (with_slack_) v.segment(N() + J(), L()) = z.segment(N() + K(), L());
    return v;
  }

  Vector apply_Qt(const Vector& v) const {
    Vector z(z_size());
    z.segment(0, N()) = v.segment(0, N());
    z.segment(N(), K()) = P_.apply_transpose(v.segment(N(), J()));
    if (with_slack_) z.segment(N() + K(), L()) = v.segment(N() + J(), L());
    return z;
  }

  Vector apply_M(const Vector& z) const {
    Vector out(z_size());
    out.segment(0, N()) = m_block_.apply(z.segment(0, N()));
    out.segment(N(), K()) = h_block_.apply(z.segment(N(), K()));
    if (with_slack_) out.segment(N() + K(), L()) = xi_diag_ * z.segment(N() + K(), L());
    return out;
  }

  Vector solve_M(const Vector& rhs) const {
    if (rhs.size() != z_size()) throw std::invalid_argument("solve_M: dimension mismatch");
    Vector z(z_size());
    z.segment(0, N()) = m_block_.solve(rhs.segment(0, N()));
    z.segment(N(), K()) = h_block_.solve(rhs.segment(N(), K()));
    if (with_slack_) z.segment(N() + K(), L()) = rhs.segment(N() + K(), L()) / xi_diag_;
    return z;
  }

  // Dense assemblies, for verification on small problems.
  Matrix dense_E() const {
    Matrix E = Matrix::Zero(u_size(), z_size());
    E.block(0, 0, L(), N()) = instance_->C().to_dense();
    E.block(L(), N(), L(), K()) = instance_->B().to_dense();
    if (with_slack_)
      E.block(2 * L(), N() + K(), L(), L()) = Matrix::Identity(L(), L()) / lambda_;
    return E;
  }

  Matrix dense_Q() const {
    Matrix Q = Matrix::Zero(v_size(), z_size());
    Q.block(0, 0, N(), N()).setIdentity();
    Q.block(N(), N(), J(), K()) = P_.to_dense();
    if (with_slack_) Q.block(N() + J(), N() + K(), L(), L()).setIdentity();
    return Q;
  }

  Matrix dense_M() const {
    Matrix M = Matrix::Zero(z_size(), z_size());
    M.block(0, 0, N(), N()) = m_block_.dense();
    M.block(N(), N(), K(), K()) = h_block_.dense();
    if (with_slack_)
      M.block(N() + K(), N() + K(), L(), L()) = xi_diag_ * Matrix::Identity(L(), L());
    return M;
  }

 private:
  const ProblemInstance* instance_;
  bool with_slack_;
  double lambda_;
  LinearOperator P_;
  SpdBlock m_block_;
  SpdBlock h_block_;
  double xi_diag_;
};

struct SolverState {
  Vector u, v, z, alpha, beta;
  Vector Ez, Qz;  // E z and Q z for the current z
  int iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// z = 0, alpha = 0, beta = 0.
inline SolverState initial_state(const SplitOperators& ops) {
  SolverState s;
  s.z = Vector::Zero(ops.z_size());
  s.u = Vector::Zero(ops.u_size());
  s.alpha = Vector::Zero(ops.u_size());
  s.Ez = Vector::Zero(ops.u_size());
  s.v = Vector::Zero(ops.v_size());
  s.beta = Vector::Zero(ops.v_size());
  s.Qz = Vector::Zero(ops.v_size());
  return s;
}

inline void advance(SolverState& state, const ProblemInstance& instance,
                    const SolverConfig& config, const SplitOperators& ops) {
  if (state.z.size() != ops.z_size() || state.alpha.size() != ops.u_size() ||
      state.beta.size() != ops.v_size())
    throw std::invalid_argument("admm_step: state does not match the operators");

  state.u = project_set(state.Ez - state.alpha, instance, ops.with_slack());
  state.v = soft_threshold(state.Qz - state.beta, 1.0 / config.rho);

  const Vector rhs = ops.apply_Et(state.alpha + state.u) + ops.apply_Qt(state.beta + state.v);
  const Vector z_prev = std::move(state.z);
  state.z = ops.solve_M(rhs);
  state.Ez = ops.apply_E(state.z);
  state.Qz = ops.apply_Q(state.z);

  const Vector ru = state.u - state.Ez;
  const Vector rv = state.v - state.Qz;
  state.alpha += ru;
  state.beta += rv;

  state.primal_residual = ru.norm() + rv.norm();
  state.dual_residual = config.rho * ops.apply_M(state.z - z_prev).norm();
  ++state.iteration;
}

inline SolverState admm_step(SolverState state, const ProblemInstance& instance,
                             const SolverConfig& config, const SplitOperators& ops) {
  advance(state, instance, config, ops);
  return state;
}

// Splits z into (h, m, xi), unwinding the lambda scaling of the slack block.
inline Solution extract_solution(const SolverState& state, const SplitOperators& ops,
                                 const SolverConfig& config) {
  Solution sol;
  sol.m_hat = state.z.segment(0, ops.N());
  sol.h_hat = state.z.segment(ops.N(), ops.K());
  if (ops.with_slack()) sol.xi_hat = state.z.segment(ops.N() + ops.K(), ops.L()) / ops.lambda();
  sol.objective = objective(sol.h_hat, sol.m_hat, sol.xi_hat, ops.P(), config.mode, config.lambda);
  sol.iters_used = state.iteration;
  sol.primal_residual = state.primal_residual;
  sol.dual_residual = state.dual_residual;
  return sol;
}

inline Solution solve(const ProblemInstance& instance, const SolverConfig& config) {
  config.validate();
  const SplitOperators ops(instance, config);
  SolverState state = initial_state(ops);
  bool converged = false;
  while (state.iteration < config.max_iters) {
    advance(state, instance, config, ops);
    if (state.primal_residual <= config.tol_primal && state.dual_residual <= config.tol_dual) {
      converged = true;
      break;
    }
  }
  Solution sol = extract_solution(state, ops, config);
  sol.converged = converged;
  return sol;
}

}  // namespace bhull

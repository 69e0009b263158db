#pragma once

// Synthetic instances, recovery metric and phase-portrait grids.

#include "bhull/admm.hpp"
#include "bhull/dict.hpp"
#include "bhull/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

namespace bhull {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable seed for trial `trial` of grid cell (N, L).
inline uint64_t trial_seed(uint64_t base, uint64_t N, uint64_t L, uint64_t trial) {
  uint64_t h = splitmix64(base);
  h = splitmix64(h ^ N);
  h = splitmix64(h ^ L);
  return splitmix64(h ^ trial);
}

// round(0.05 N), half away from zero, at least 1.
inline int sparsity_for(int N) {
  return std::max(1, static_cast<int>(std::lround(0.05 * N)));
}

namespace lab_detail {

inline Vector sparse_sign_vector(Eigen::Index n, int count, std::mt19937_64& rng) {
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::bernoulli_distribution coin(0.5);
  Vector v = Vector::Zero(n);
  for (int i = 0; i < count; ++i) v[idx[i]] = coin(rng) ? 1.0 : -1.0;
  return v;
}

}  // namespace lab_detail

// Gaussian B (L x K) and C (L x N) with entries N(0, 1/L), truth vectors with
// `sparsity_count` entries of +-1 each.
inline ProblemInstance make_instance(int N, int K, int L, int sparsity_count, uint64_t seed) {
  if (N < 1 || K < 1 || L < 1)
    throw std::invalid_argument("make_instance: dimensions must be positive");
  if (sparsity_count < 1 || sparsity_count > std::min(N, K))
    throw std::invalid_argument("make_instance: sparsity must be in [1, min(K, N)]");
  const double scale = 1.0 / std::sqrt(double(L));
  Matrix B = make_gaussian(L, K, scale, splitmix64(seed ^ 0xB));
  Matrix C = make_gaussian(L, N, scale, splitmix64(seed ^ 0xC));
  std::mt19937_64 rng(splitmix64(seed ^ 0x5));
  Vector h = lab_detail::sparse_sign_vector(K, sparsity_count, rng);
  Vector m = lab_detail::sparse_sign_vector(N, sparsity_count, rng);
  const Vector w = B * h;
  const Vector x = C * m;
  Vector t(L);
  for (int l = 0; l < L; ++l) t[l] = w[l] < 0.0 ? -1.0 : 1.0;
  Vector y = w.cwiseProduct(x);
  return ProblemInstance(std::move(B), std::move(C), std::move(y), std::move(t),
                         GroundTruth{std::move(h), std::move(m)});
}

// Same dictionaries and t with the listed measurements negated. The result
// carries no truth since y no longer equals (B h) .* (C m).
inline ProblemInstance flip_measurements(const ProblemInstance& instance,
                                         const std::vector<Eigen::Index>& indices) {
  Vector y = instance.y();
  for (auto l : indices) {
    if (l < 0 || l >= y.size()) throw std::out_of_range("flip_measurements: bad index");
    y[l] = -y[l];
  }
  return ProblemInstance(instance.B(), instance.C(), std::move(y), instance.t());
}

inline double recovery_error(const Solution& solution, const ProblemInstance& instance) {
  if (!instance.truth()) throw std::invalid_argument("recovery_error: instance has no truth");
  const auto bal = balanced_scaling(instance.truth()->h, instance.truth()->m);
  const double dh = (solution.h_hat - bal.h_tilde).squaredNorm();
  const double dm = (solution.m_hat - bal.m_tilde).squaredNorm();
  return std::sqrt(dh + dm);
}

// Relative Frobenius error of the rank-one lift, ||h m^T - h0 m0^T|| / ||h0 m0^T||.
// Unlike recovery_error it ignores how the scale is split between the factors.
inline double lifted_error(const Vector& h, const Vector& m, const Vector& h0, const Vector& m0) {
  const double ref = h0.norm() * m0.norm();
  if (ref == 0.0) throw std::invalid_argument("lifted_error: reference is zero");
  // ||a b^T - c d^T||_F^2 expanded without forming either matrix.
  const double sq = h.squaredNorm() * m.squaredNorm() + ref * ref - 2.0 * h.dot(h0) * m.dot(m0);
  return std::sqrt(std::max(sq, 0.0)) / ref;
}

// ||(h_hat, m_hat) - (h_tilde, m_tilde)||_2 < threshold against the balanced truth.
inline bool is_success(const Solution& solution, const ProblemInstance& instance,
                       double threshold) {
  return recovery_error(solution, instance) < threshold;
}

// C (S1 + S2) ln(K + N)^2.
inline double theory_line(double S1, double S2, double K, double N, double C) {
  const double lg = std::log(K + N);
  return C * (S1 + S2) * lg * lg;
}

struct PhaseCell {
  int N = 0, K = 0, L = 0, S1 = 0, S2 = 0;
  int trials = 0;
  int successes = 0;
  uint64_t seed_base = 0;

  double success_rate() const { return trials > 0 ? double(successes) / trials : 0.0; }
};

struct PhaseGridOptions {
  int max_iters = 10000;
  double tol_primal = 1e-10;
  double tol_dual = 1e-10;
  unsigned threads = 1;
};

inline bool run_phase_trial(int N, int L, int trial, uint64_t seed, double rho,
                            double threshold, const PhaseGridOptions& opts) {
  const int S = sparsity_for(N);
  const ProblemInstance inst = make_instance(N, N, L, S, trial_seed(seed, N, L, trial));
  SolverConfig cfg;
  cfg.mode = Mode::Noiseless;
  cfg.rho = rho;
  cfg.max_iters = opts.max_iters;
  cfg.tol_primal = opts.tol_primal;
  cfg.tol_dual = opts.tol_dual;
  return is_success(solve(inst, cfg), inst, threshold);
}

// One cell per (N, L) pair with K = N and S1 = S2 = sparsity_for(N). Trials
// are independent and seeded by (seed, N, L, trial), so results do not depend
// on the thread count.
inline std::vector<PhaseCell> run_phase_grid(const std::vector<int>& N_list,
                                             const std::vector<int>& L_list, int trials,
                                             double rho, double threshold, uint64_t seed,
                                             const PhaseGridOptions& opts = {}) {
  if (N_list.empty() || L_list.empty())
    throw std::invalid_argument("run_phase_grid: empty N or L list");
  if (trials < 0) throw std::invalid_argument("run_phase_grid: negative trial count");
  std::vector<PhaseCell> cells;
  struct Job {
    size_t cell;
    int trial;
  };
  std::vector<Job> jobs;
  for (int N : N_list)
    for (int L : L_list) {
      const int S = sparsity_for(N);
      cells.push_back({N, N, L, S, S, trials, 0, seed});
      for (int k = 0; k < trials; ++k) jobs.push_back({cells.size() - 1, k});
    }

  std::vector<char> ok(jobs.size(), 0);
  auto work = [&](size_t first, size_t stride) {
    for (size_t j = first; j < jobs.size(); j += stride) {
      const PhaseCell& c = cells[jobs[j].cell];
      ok[j] = run_phase_trial(c.N, c.L, jobs[j].trial, seed, rho, threshold, opts);
    }
  };
  const unsigned nthreads = std::max(1u, opts.threads);
  if (nthreads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(work, t, nthreads);
  }
  for (size_t j = 0; j < jobs.size(); ++j) cells[jobs[j].cell].successes += ok[j];
  return cells;
}

// s_l (b_l^T h c_l^T m_tilde + b_l^T h_tilde c_l^T m) >= 2 |y_l| for every l:
// the linearization of the hyperbolic constraints at the balanced truth.
// `rel_tol` absorbs rounding for points on the boundary.
inline bool lp_constraints_hold(const Vector& h, const Vector& m, const ProblemInstance& instance,
                                const BalancedPoint& truth_balanced, double rel_tol = 1e-12) {
  const Vector w = instance.B().apply(h);
  const Vector x = instance.C().apply(m);
  const Vector wt = instance.B().apply(truth_balanced.h_tilde);
  const Vector xt = instance.C().apply(truth_balanced.m_tilde);
  for (Eigen::Index l = 0; l < instance.L(); ++l) {
    const double lhs = instance.s()[l] * (w[l] * xt[l] + wt[l] * x[l]);
    const double rhs = 2.0 * std::abs(instance.y()[l]);
    const double slack = rel_tol * (std::abs(w[l] * xt[l]) + std::abs(wt[l] * x[l]) + rhs);
    if (lhs < rhs - slack) return false;
  }
  return true;
}

inline bool lp_constraints_hold(const Vector& h, const Vector& m, const ProblemInstance& instance) {
  if (!instance.truth()) throw std::invalid_argument("lp_constraints_hold: instance has no truth");
  return lp_constraints_hold(h, m, instance,
                             balanced_scaling(instance.truth()->h, instance.truth()->m));
}

}  // namespace bhull

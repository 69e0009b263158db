#pragma once

// Dictionaries B, C for the experiments: Gaussian, partial inverse DCT and
// Bessel-function columns, plus the image difference operators in tv.hpp.

#include "bhull/model.hpp"
#include "bhull/tv.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

namespace bhull {

inline Matrix make_gaussian(Eigen::Index L, Eigen::Index n, double scale, uint64_t seed) {
  if (L < 1 || n < 1) throw std::invalid_argument("make_gaussian: empty shape");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(L, n);
  // Column-major fill so the stream order matches the storage order.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < L; ++i) out(i, j) = scale * normal(rng);
  return out;
}

// Orthonormal DCT-II: row k is alpha_k cos(pi (2n + 1) k / (2L)).
inline Matrix dct_matrix(Eigen::Index L) {
  if (L < 1) throw std::invalid_argument("dct_matrix: L must be positive");
  Matrix F(L, L);
  const double a0 = std::sqrt(1.0 / L), ak = std::sqrt(2.0 / L);
  for (Eigen::Index k = 0; k < L; ++k)
    for (Eigen::Index n = 0; n < L; ++n)
      F(k, n) = (k == 0 ? a0 : ak) *
                std::cos(std::numbers::pi * (2.0 * n + 1.0) * k / (2.0 * L));
  return F;
}

// Its transpose; column k is the k-th cosine basis vector.
inline Matrix inverse_dct_matrix(Eigen::Index L) { return dct_matrix(L).transpose(); }

inline Matrix frobenius_normalized(Matrix M, double target) {
  const double norm = M.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("frobenius_normalized: zero matrix");
  M *= target / norm;
  return M;
}

// n_cols columns: optionally the all-ones column first, the rest drawn without
// replacement from the columns of the inverse DCT matrix.
inline Matrix make_partial_dct(Eigen::Index L, Eigen::Index n_cols, uint64_t seed,
                               bool include_ones_column = true,
                               bool frobenius_normalize = true) {
  if (n_cols < 1 || n_cols > L)
    throw std::invalid_argument("make_partial_dct: need 1 <= n_cols <= L");
  const Matrix F = inverse_dct_matrix(L);
  std::vector<Eigen::Index> order(L);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Matrix C(L, n_cols);
  Eigen::Index col = 0;
  if (include_ones_column) C.col(col++).setOnes();
  for (Eigen::Index i = 0; col < n_cols; ++i) C.col(col++) = F.col(order[i]);
  if (frobenius_normalize) C = frobenius_normalized(std::move(C), std::sqrt(double(L)));
  return C;
}

// J_nu(z) for real order, including negative non-integer orders.
inline double bessel_j(double nu, double z) { return boost::math::cyl_bessel_j(nu, z); }

// Column c_i = J_{g_i / (6 + 0.1|z1|) + 5|z2|}(0.1 + 10|z3|) with
// g_i = -9 + 14 (i - 1) / (L - 1) and z ~ N(0, I_3) drawn per column.
inline Matrix make_bessel(Eigen::Index L, Eigen::Index n_cols, uint64_t seed,
                          bool include_ones_column = true,
                          bool frobenius_normalize = true) {
  if (L < 2 || n_cols < 1) throw std::invalid_argument("make_bessel: need L >= 2, n_cols >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix C(L, n_cols);
  Eigen::Index col = 0;
  if (include_ones_column) C.col(col++).setOnes();
  for (; col < n_cols; ++col) {
    const double z1 = normal(rng), z2 = normal(rng), z3 = normal(rng);
    const double denom = 6.0 + 0.1 * std::abs(z1);
    const double order_shift = 5.0 * std::abs(z2);
    const double arg = 0.1 + 10.0 * std::abs(z3);
    for (Eigen::Index i = 0; i < L; ++i) {
      const double g = -9.0 + 14.0 * double(i) / double(L - 1);
      C(i, col) = bessel_j(g / denom + order_shift, arg);
    }
  }
  if (frobenius_normalize) C = frobenius_normalized(std::move(C), std::sqrt(double(L)));
  return C;
}

struct GaussianDict {
  double scale = 1.0;
};
struct IdentityDict {};
struct PartialDctDict {
  Eigen::Index n_cols = 1;
  bool include_ones_column = true;
};
struct BesselDict {
  Eigen::Index n_cols = 1;
  bool include_ones_column = true;
};
// An explicit matrix, e.g. loaded from a matrix CSV by the CLI.
struct MatrixDict {
  Matrix matrix;
};

struct DictionarySpec {
  std::variant<GaussianDict, IdentityDict, PartialDctDict, BesselDict, MatrixDict> kind =
      IdentityDict{};
  bool frobenius_normalize_to_sqrt_L = false;
};

// An L-row dictionary; n_cols for Gaussian comes from `gaussian_cols`.
inline LinearOperator build_dictionary(const DictionarySpec& spec, Eigen::Index L,
                                       uint64_t seed, Eigen::Index gaussian_cols = 0) {
  const double target = std::sqrt(double(L));
  const bool norm = spec.frobenius_normalize_to_sqrt_L;
  return std::visit(
      [&](const auto& kind) -> LinearOperator {
        using T = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<T, GaussianDict>) {
          Matrix G = make_gaussian(L, gaussian_cols, kind.scale, seed);
          return norm ? frobenius_normalized(std::move(G), target) : G;
        } else if constexpr (std::is_same_v<T, IdentityDict>) {
          // ||I_L||_F = sqrt(L) already.
          return LinearOperator::identity(L);
        } else if constexpr (std::is_same_v<T, PartialDctDict>) {
          return make_partial_dct(L, kind.n_cols, seed, kind.include_ones_column, norm);
        } else if constexpr (std::is_same_v<T, BesselDict>) {
          return make_bessel(L, kind.n_cols, seed, kind.include_ones_column, norm);
        } else {
          if (kind.matrix.rows() != L)
            throw std::invalid_argument("build_dictionary: matrix must have L rows");
          return norm ? frobenius_normalized(kind.matrix, target) : kind.matrix;
        }
      },
      spec.kind);
}

}  // namespace bhull

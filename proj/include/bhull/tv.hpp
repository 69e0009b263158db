#pragma once

// Finite-difference operators on column-major vectorized p x q images.

#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bhull {

// The integer n with x - 1 < n <= x.
inline long floor_minus(double x) { return static_cast<long>(std::floor(x)); }

struct TVStructure {
  int p = 0;  // image rows
  int q = 0;  // image cols
  Eigen::SparseMatrix<double> Dv;  // (L - q) x L, differences down each column
  Eigen::SparseMatrix<double> Dh;  // (L - p) x L, differences along each row
  Eigen::SparseMatrix<double> D;   // [Dv; Dh]
};

inline TVStructure make_tv_structure(int p, int q) {
  if (p < 2 || q < 2)
    throw std::invalid_argument("make_tv_structure: p and q must be >= 2");
  const long L = static_cast<long>(p) * q;
  using Triplet = Eigen::Triplet<double>;

  // Row i (1-based) of Dv pairs pixels j and j + 1 with
  // j = i + ((i - 1) / (p - 1))_-, which skips the wrap between columns.
  std::vector<Triplet> dv;
  const long nv = L - q;
  dv.reserve(2 * nv);
  for (long i = 1; i <= nv; ++i) {
    const long j = i + floor_minus(static_cast<double>(i - 1) / (p - 1));
    dv.emplace_back(i - 1, j - 1, -1.0);
    dv.emplace_back(i - 1, j, 1.0);
  }

  std::vector<Triplet> dh;
  const long nh = L - p;
  dh.reserve(2 * nh);
  for (long i = 1; i <= nh; ++i) {
    dh.emplace_back(i - 1, i - 1, -1.0);
    dh.emplace_back(i - 1, i - 1 + p, 1.0);
  }

  std::vector<Triplet> d = dv;
  d.reserve(dv.size() + dh.size());
  for (const auto& tr : dh) d.emplace_back(tr.row() + nv, tr.col(), tr.value());

  TVStructure tv;
  tv.p = p;
  tv.q = q;
  tv.Dv.resize(nv, L);
  tv.Dv.setFromTriplets(dv.begin(), dv.end());
  tv.Dh.resize(nh, L);
  tv.Dh.setFromTriplets(dh.begin(), dh.end());
  tv.D.resize(nv + nh, L);
  tv.D.setFromTriplets(d.begin(), d.end());
  return tv;
}

}  // namespace bhull

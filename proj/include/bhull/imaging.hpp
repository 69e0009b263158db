#pragma once

// Distortion removal: y = w .* x with w a piecewise-constant image and x a
// distortion in the span of a dictionary C. Solved with the TV program,
// B = I, t = 1 and P = D.

#include "bhull/admm.hpp"
#include "bhull/dict.hpp"
#include "bhull/model.hpp"
#include "bhull/tv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace bhull {

// p x q grayscale image, pixels stored column-major (index c * p + r).
struct GrayImage {
  int p = 0;
  int q = 0;
  Vector pixels;

  GrayImage() = default;
  GrayImage(int rows, int cols, Vector values) : p(rows), q(cols), pixels(std::move(values)) {
    validate();
  }

  static GrayImage filled(int rows, int cols, double value) {
    return {rows, cols, Vector::Constant(Eigen::Index(rows) * cols, value)};
  }

  double& at(int r, int c) { return pixels[Eigen::Index(c) * p + r]; }
  double at(int r, int c) const { return pixels[Eigen::Index(c) * p + r]; }
  Eigen::Index size() const { return pixels.size(); }

  void validate() const {
    if (p < 1 || q < 1 || pixels.size() != Eigen::Index(p) * q)
      throw std::invalid_argument("GrayImage: pixel count must equal p * q");
    if (!pixels.allFinite()) throw std::invalid_argument("GrayImage: non-finite pixel");
  }
};

// ||D v||_1 for a column-major p x q image.
inline double total_variation(const Vector& v, int p, int q) {
  return (make_tv_structure(p, q).D * v).lpNorm<1>();
}

// Affine map onto [0, 255]; a constant vector maps to 255.
inline Vector rescale_to_byte_range(const Vector& v) {
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  const double range = hi - lo;
  if (!(range > 1e-12 * std::max(1.0, std::abs(hi)))) return Vector::Constant(v.size(), 255.0);
  return ((v.array() - lo) * (255.0 / range)).matrix();
}

// Area-average resampling to rows x cols.
inline GrayImage resize_image(const GrayImage& img, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("resize_image: empty target");
  GrayImage out = GrayImage::filled(rows, cols, 0.0);
  const double sr = double(img.p) / rows, sc = double(img.q) / cols;
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) {
      const double r0 = r * sr, r1 = (r + 1) * sr, c0 = c * sc, c1 = (c + 1) * sc;
      double acc = 0.0, area = 0.0;
      for (int cc = int(std::floor(c0)); cc < int(std::ceil(c1)) && cc < img.q; ++cc)
        for (int rr = int(std::floor(r0)); rr < int(std::ceil(r1)) && rr < img.p; ++rr) {
          const double wr = std::min(r1, rr + 1.0) - std::max(r0, double(rr));
          const double wc = std::min(c1, cc + 1.0) - std::max(c0, double(cc));
          acc += wr * wc * img.at(rr, cc);
          area += wr * wc;
        }
      out.at(r, c) = acc / area;
    }
  return out;
}

struct FlattenOptions {
  double lambda = 1e3;
  double rho = 1e-4;
  int max_iters = 2000;
  double tol = 1e-6;
  uint64_t seed = 0;
};

struct FlattenResult {
  GrayImage recovered;  // B h_hat rescaled to [0, 255]
  Vector h_hat;
  Vector m_hat;
  Vector xi_hat;
  Solution solution;
};

inline ProblemInstance make_flatten_instance(const GrayImage& img, const DictionarySpec& dict,
                                             uint64_t seed) {
  img.validate();
  if (img.p < 2 || img.q < 2) throw std::invalid_argument("flatten_image: image must be at least 2x2");
  const Eigen::Index L = img.size();
  return ProblemInstance(LinearOperator::identity(L), build_dictionary(dict, L, seed, 1),
                         img.pixels, Vector::Ones(L));
}

inline FlattenResult flatten_image(const GrayImage& img, const DictionarySpec& dict,
                                   const FlattenOptions& opts = {}) {
  const ProblemInstance inst = make_flatten_instance(img, dict, opts.seed);
  SolverConfig cfg;
  cfg.mode = Mode::TV;
  cfg.lambda = opts.lambda;
  cfg.rho = opts.rho;
  cfg.max_iters = opts.max_iters;
  cfg.tol_primal = opts.tol;
  cfg.tol_dual = opts.tol;
  cfg.p_matrix = TvOfB{img.p, img.q};

  FlattenResult res;
  res.solution = solve(inst, cfg);
  res.h_hat = res.solution.h_hat;
  res.m_hat = res.solution.m_hat;
  res.xi_hat = res.solution.xi_hat;
  res.recovered = GrayImage(img.p, img.q, rescale_to_byte_range(inst.B().apply(res.h_hat)));
  return res;
}

}  // namespace bhull

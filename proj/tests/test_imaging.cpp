#include "bhull/imaging.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bhull;

namespace {

GrayImage two_blocks(int p, int q) {
  GrayImage img = GrayImage::filled(p, q, 1.0);
  for (int r = p / 4; r < 3 * p / 4; ++r)
    for (int c = q / 5; c < q / 2 + 1; ++c) img.at(r, c) = 2.0;
  return img;
}

// Smooth positive distortion from three DCT columns, including the ones column.
struct Distorted {
  GrayImage foreground;
  Matrix C;
  Vector m;
  GrayImage observed;
};

Distorted distorted_blocks(int p, int q, uint64_t seed) {
  Distorted d;
  d.foreground = two_blocks(p, q);
  d.C = make_partial_dct(p * q, 3, seed);
  d.m = Vector(3);
  d.m << 1.0, 0.3, -0.2;
  const Vector x = d.C * d.m;
  d.observed = GrayImage(p, q, d.foreground.pixels.cwiseProduct(x));
  return d;
}

}  // namespace

TEST(GrayImage, ColumnMajorStorageAndValidation) {
  GrayImage img(2, 3, (Vector(6) << 0, 1, 2, 3, 4, 5).finished());
  EXPECT_EQ(img.at(1, 0), 1.0);
  EXPECT_EQ(img.at(0, 2), 4.0);
  EXPECT_THROW(GrayImage(2, 2, Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(GrayImage(1, 1, Vector::Constant(1, NAN)), std::invalid_argument);
}

TEST(Rescale, AffineOntoByteRange) {
  const Vector r = rescale_to_byte_range((Vector(3) << -1, 0, 1).finished());
  EXPECT_EQ(r, (Vector(3) << 0, 127.5, 255).finished());
  EXPECT_EQ(rescale_to_byte_range(Vector::Constant(4, 7.0)), Vector::Constant(4, 255.0));
}

TEST(Resize, AreaAverage) {
  GrayImage img = GrayImage::filled(4, 4, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) img.at(r, c) = r + 4 * c;
  const GrayImage half = resize_image(img, 2, 2);
  EXPECT_DOUBLE_EQ(half.at(0, 0), (0 + 1 + 4 + 5) / 4.0);
  EXPECT_DOUBLE_EQ(half.at(1, 1), (10 + 11 + 14 + 15) / 4.0);
  EXPECT_EQ(resize_image(img, 4, 4).pixels, img.pixels);
  // Mean is preserved by area averaging onto a non-divisor grid.
  EXPECT_NEAR(resize_image(img, 3, 3).pixels.mean(), img.pixels.mean(), 1e-12);
}

TEST(TotalVariation, BlockEdges) {
  const GrayImage img = two_blocks(8, 10);
  // Sum of absolute differences over every adjacent pixel pair.
  double jumps = 0.0;
  for (int c = 0; c < 10; ++c)
    for (int r = 0; r < 8; ++r) {
      if (r + 1 < 8) jumps += std::abs(img.at(r + 1, c) - img.at(r, c));
      if (c + 1 < 10) jumps += std::abs(img.at(r, c + 1) - img.at(r, c));
    }
  EXPECT_DOUBLE_EQ(total_variation(img.pixels, 8, 10), jumps);
  EXPECT_EQ(total_variation(Vector::Ones(80), 8, 10), 0.0);
}

TEST(Flatten, ConstantImageStaysConstant) {
  FlattenOptions opts;
  opts.max_iters = 1000;
  const auto res = flatten_image(GrayImage::filled(12, 12, 100.0), {PartialDctDict{3, true}, true}, opts);
  EXPECT_LE(total_variation(res.h_hat, 12, 12), 1e-9 * res.h_hat.lpNorm<1>());
  EXPECT_EQ(res.recovered.pixels.maxCoeff(), res.recovered.pixels.minCoeff());
  EXPECT_TRUE(res.recovered.pixels.allFinite());
}

TEST(Flatten, RejectsTinyImagesAndBadDictionaries) {
  EXPECT_THROW(flatten_image(GrayImage::filled(1, 5, 1.0), {PartialDctDict{1, true}}), std::invalid_argument);
  EXPECT_THROW(flatten_image(GrayImage::filled(4, 4, 1.0), {MatrixDict{Matrix::Ones(15, 2)}}),
               std::invalid_argument);
}

TEST(TvProgram, ObjectiveUnboundedBelowTowardsConstantFactor) {
  // For positive images with B = I and t = 1 the pair h = c 1, m = (max w / c) m0
  // is feasible and its objective tends to zero as c grows. The infimum is not
  // attained, so the piecewise-constant ground truth is not a minimiser.
  const auto d = distorted_blocks(16, 16, 3);
  const Vector x = d.C * d.m;
  ASSERT_GT(x.minCoeff(), 0.0);
  const ProblemInstance inst(LinearOperator::identity(256), LinearOperator(d.C), d.observed.pixels,
                             Vector::Ones(256));
  SolverConfig cfg;
  cfg.mode = Mode::TV;
  cfg.p_matrix = TvOfB{16, 16};
  const double truth_objective = objective(d.foreground.pixels, d.m, Vector::Zero(256), cfg, inst);
  const double wmax = d.foreground.pixels.maxCoeff();
  double previous = truth_objective;
  for (double c : {10.0, 100.0, 1000.0, 1e4}) {
    const Vector h = Vector::Constant(256, c);
    const Vector m = (wmax / c) * d.m;
    EXPECT_LE(feasibility_violation(h, m, Vector::Zero(256), inst), 1e-12);
    const double f = objective(h, m, Vector::Zero(256), cfg, inst);
    EXPECT_LT(f, previous);
    EXPECT_NEAR(f, wmax / c * d.m.lpNorm<1>(), 1e-9);
    previous = f;
  }
}

TEST(Flatten, SolverObjectiveBeatsPiecewiseConstantTruth) {
  // Consequence of the degeneracy above: ADMM finds feasible points with lower
  // objective than the ground-truth factorisation.
  const auto d = distorted_blocks(16, 16, 3);
  FlattenOptions opts;
  opts.rho = 1.0;
  opts.max_iters = 2000;
  const auto res = flatten_image(d.observed, {MatrixDict{d.C}}, opts);
  const ProblemInstance inst = make_flatten_instance(d.observed, {MatrixDict{d.C}}, 0);
  SolverConfig cfg;
  cfg.mode = Mode::TV;
  cfg.lambda = opts.lambda;
  cfg.p_matrix = TvOfB{16, 16};
  const double truth_objective = objective(d.foreground.pixels, d.m, Vector::Zero(256), cfg, inst);
  EXPECT_LT(res.solution.objective, truth_objective);
  EXPECT_LE(feasibility_violation(res.h_hat, res.m_hat, res.xi_hat, inst), 1e-3);
}

TEST(Flatten, RecoveredImageHasLowerNormalisedVariation) {
  const auto d = distorted_blocks(16, 16, 5);
  FlattenOptions opts;
  opts.max_iters = 2000;
  const auto res = flatten_image(d.observed, {MatrixDict{d.C}}, opts);
  const double before = total_variation(d.observed.pixels, 16, 16) / d.observed.pixels.lpNorm<1>();
  const double after = total_variation(res.h_hat, 16, 16) / res.h_hat.lpNorm<1>();
  EXPECT_LT(after, before);
  EXPECT_GE(res.recovered.pixels.minCoeff(), 0.0);
  EXPECT_LE(res.recovered.pixels.maxCoeff(), 255.0);
}

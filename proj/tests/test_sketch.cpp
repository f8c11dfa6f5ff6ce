#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <random>
#include <set>

#include "lograd/sketch.hpp"
#include "lograd/synthetic.hpp"
#include "oracles.hpp"

using lograd::DenseMatrix;
using lograd::Mixing;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (double& e : v) e = normal(rng);
  return v;
}

double norm2(const std::vector<double>& v) {
  double s = 0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

double norm2(const std::vector<std::complex<double>>& v) {
  double s = 0;
  for (auto e : v) s += std::norm(e);
  return std::sqrt(s);
}

// Dense l x n realization of S F D built from the cosine / exponential
// formulas, independent of the fast transform.
Eigen::MatrixXcd dense_operator(const lograd::SrftOperator& op) {
  const std::size_t n = op.input_dim;
  Eigen::MatrixXcd pi(op.sketch_dim, n);
  Eigen::MatrixXd dct = oracle::dct_matrix(n);
  for (std::size_t r = 0; r < op.sketch_dim; ++r) {
    const std::size_t k = op.sampled_indices[r];
    for (std::size_t j = 0; j < n; ++j) {
      std::complex<double> f;
      if (op.mixing == Mixing::UnitaryDCT) {
        f = dct(k, j);
      } else {
        const double angle = -2.0 * std::numbers::pi * double((j * k) % n) / double(n);
        f = std::complex<double>(std::cos(angle), std::sin(angle)) / std::sqrt(double(n));
      }
      pi(r, j) = f * op.sign_flips[j];
    }
  }
  return pi;
}

TEST(BuildSrft, FullSamplingIsAPermutation) {
  const auto op = lograd::build_srft(8, 8, Mixing::UnitaryDCT, 3);
  auto idx = op.sampled_indices;
  std::sort(idx.begin(), idx.end());
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(idx[i], i);
}

TEST(BuildSrft, GradientShapeFromFigure) {
  const auto op = lograd::build_srft(576, 128, Mixing::UnitaryDCT, 42);
  ASSERT_EQ(op.sampled_indices.size(), 128u);
  ASSERT_EQ(op.sign_flips.size(), 576u);
  std::set<std::size_t> unique(op.sampled_indices.begin(), op.sampled_indices.end());
  EXPECT_EQ(unique.size(), 128u);
  EXPECT_LT(*unique.rbegin(), 576u);
  for (double s : op.sign_flips) EXPECT_TRUE(s == 1.0 || s == -1.0);
}

TEST(BuildSrft, DeterministicUnderSeed) {
  const auto a = lograd::build_srft(16, 4, Mixing::UnitaryDCT, 7);
  const auto b = lograd::build_srft(16, 4, Mixing::UnitaryDCT, 7);
  EXPECT_EQ(a, b);
  const auto c = lograd::build_srft(16, 4, Mixing::UnitaryDCT, 8);
  EXPECT_FALSE(a == c);
}

TEST(BuildSrft, RejectsBadSketchDims) {
  EXPECT_THROW(lograd::build_srft(4, 5, Mixing::UnitaryDCT, 1), lograd::DimensionError);
  EXPECT_THROW(lograd::build_srft(4, 0, Mixing::UnitaryDCT, 1), lograd::InvalidArgument);
}

TEST(BuildSrft, SignsRoughlyBalancedAndIndicesCoverRange) {
  // Fair coin flips and uniform sampling: loose sanity bands over many draws.
  std::size_t plus = 0, total = 0;
  std::vector<std::size_t> hits(64, 0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto op = lograd::build_srft(64, 8, Mixing::UnitaryDCT, seed);
    for (double s : op.sign_flips) plus += s > 0, ++total;
    for (auto i : op.sampled_indices) ++hits[i];
  }
  EXPECT_NEAR(double(plus) / double(total), 0.5, 0.03);
  for (auto h : hits) EXPECT_GT(h, 5u);  // expected 25 per index
}

TEST(ApplyMixing, ZeroVectorMapsToZero) {
  const auto op = lograd::build_srft(12, 3, Mixing::UnitaryDCT, 1);
  for (auto c : lograd::apply_mixing(op, std::vector<double>(12, 0.0))) EXPECT_EQ(std::abs(c), 0.0);
}

TEST(ApplyMixing, BasisVectorGivesDctColumn) {
  const std::size_t n = 10;
  auto op = lograd::build_srft(n, 2, Mixing::UnitaryDCT, 5);
  std::fill(op.sign_flips.begin(), op.sign_flips.end(), 1.0);
  const Eigen::MatrixXd dct = oracle::dct_matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> e(n, 0.0);
    e[k] = 1.0;
    const auto out = lograd::apply_mixing(op, e);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(out[i].real(), dct(i, k), 1e-12);
      EXPECT_EQ(out[i].imag(), 0.0);
    }
  }
}

TEST(ApplyMixing, RejectsLengthMismatch) {
  const auto op = lograd::build_srft(12, 3, Mixing::UnitaryDCT, 1);
  EXPECT_THROW(lograd::apply_mixing(op, std::vector<double>(11)), lograd::DimensionError);
}

// Isometry of F D for 100 random vectors, both transforms, several lengths.
TEST(SketchProperties, MixingIsAnIsometry) {
  for (Mixing mixing : {Mixing::UnitaryDCT, Mixing::ComplexDFT}) {
    for (std::size_t n : {64u, 576u, 97u}) {
      const auto op = lograd::build_srft(n, 4, mixing, n);
      for (std::uint64_t t = 0; t < 100; ++t) {
        const auto v = random_vector(n, 1000 * n + t);
        const double in = norm2(v);
        EXPECT_NEAR(norm2(lograd::apply_mixing(op, v)), in, 1e-10 * in);
      }
    }
  }
}

TEST(SketchProperties, SignFlipIsAnInvolution) {
  const auto op = lograd::build_srft(33, 5, Mixing::UnitaryDCT, 9);
  const auto v = random_vector(33, 2);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(op.sign_flips[i] * (op.sign_flips[i] * v[i]), v[i]);
  }
}

// Rows of S F D, realized by applying the fast operator to basis vectors.
TEST(SketchProperties, OperatorRowsAreOrthonormal) {
  for (Mixing mixing : {Mixing::UnitaryDCT, Mixing::ComplexDFT}) {
    const std::size_t n = 48, ell = 20;
    const auto op = lograd::build_srft(n, ell, mixing, 11);
    Eigen::MatrixXcd pi(ell, n);
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<double> e(n, 0.0);
      e[k] = 1.0;
      const auto col = lograd::apply_mixing(op, e);
      for (std::size_t r = 0; r < ell; ++r) pi(r, k) = col[op.sampled_indices[r]];
    }
    const Eigen::MatrixXcd gram = pi * pi.adjoint();
    EXPECT_LT((gram - Eigen::MatrixXcd::Identity(ell, ell)).norm(), 1e-10);
  }
}

TEST(SketchProperties, AgreesWithDenseOperator) {
  for (Mixing mixing : {Mixing::UnitaryDCT, Mixing::ComplexDFT}) {
    for (std::size_t n : {1u, 7u, 16u, 45u, 64u}) {
      const std::size_t ell = std::max<std::size_t>(1, n / 3);
      const auto op = lograd::build_srft(n, ell, mixing, 100 + n);
      lograd::Rng rng(n);
      const DenseMatrix g = lograd::gaussian_matrix(9, n, rng);
      const Eigen::MatrixXcd expected = oracle::to_eigen(g) * dense_operator(op).transpose();
      const DenseMatrix y = lograd::sketch_columns(op, g);
      ASSERT_EQ(y.cols(), op.output_columns());
      for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < ell; ++j) {
          EXPECT_NEAR(y(i, j), expected(i, j).real(), 1e-10);
          if (mixing == Mixing::ComplexDFT) {
            EXPECT_NEAR(y(i, ell + j), expected(i, j).imag(), 1e-10);
          }
        }
      }
    }
  }
}

TEST(SketchColumns, PreservesColumnSpaceOfExactRankMatrix) {
  const std::size_t r = 6;
  const DenseMatrix g = lograd::low_rank_matrix(40, 90, r, 21);
  const auto op = lograd::build_srft(90, r, Mixing::UnitaryDCT, 4);
  const DenseMatrix y = lograd::sketch_columns(op, g);
  EXPECT_EQ(oracle::numerical_rank(oracle::to_eigen(g)), r);
  EXPECT_EQ(oracle::numerical_rank(oracle::to_eigen(y)), r);
  // Same span: stacking Y next to G does not raise the rank.
  Eigen::MatrixXd both(40, 90 + r);
  both << oracle::to_eigen(g), oracle::to_eigen(y);
  EXPECT_EQ(oracle::numerical_rank(both), r);
}

TEST(SketchColumns, ZeroInZeroOut) {
  const auto op = lograd::build_srft(30, 5, Mixing::UnitaryDCT, 4);
  const DenseMatrix y = lograd::sketch_columns(op, DenseMatrix(7, 30));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(SketchColumns, FigureShape) {
  lograd::Rng rng(1);
  const DenseMatrix g = lograd::gaussian_matrix(128, 576, rng);
  const auto op = lograd::build_srft(576, 128, Mixing::UnitaryDCT, 42);
  const DenseMatrix y = lograd::sketch_columns(op, g);
  EXPECT_EQ(y.rows(), 128u);
  EXPECT_EQ(y.cols(), 128u);
}

TEST(SketchColumns, RejectsWrongWidth) {
  const auto op = lograd::build_srft(30, 5, Mixing::UnitaryDCT, 4);
  EXPECT_THROW(lograd::sketch_columns(op, DenseMatrix(7, 29)), lograd::DimensionError);
}

TEST(SketchGaussian, ZeroInZeroOut) {
  const DenseMatrix y = lograd::sketch_gaussian(DenseMatrix(5, 20), 4, 1);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(SketchGaussian, DeterministicUnderSeed) {
  lograd::Rng rng(3);
  const DenseMatrix g = lograd::gaussian_matrix(10, 20, rng);
  EXPECT_EQ(lograd::sketch_gaussian(g, 6, 77), lograd::sketch_gaussian(g, 6, 77));
}

TEST(SketchGaussian, CapturesExactRankRange) {
  const std::size_t r = 10;
  const DenseMatrix g = lograd::low_rank_matrix(60, 80, r, 5);
  const DenseMatrix y = lograd::sketch_gaussian(g, r + 8, 6);
  const Eigen::MatrixXd ye = oracle::to_eigen(y);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(ye);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(60, r + 8);
  EXPECT_LE(oracle::projection_residual(oracle::to_eigen(g), q), 1e-8);
}

TEST(SketchGaussian, RejectsOversizedSketch) {
  EXPECT_THROW(lograd::sketch_gaussian(DenseMatrix(5, 4), 5, 1), lograd::DimensionError);
}

}  // namespace

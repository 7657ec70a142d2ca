#include <gtest/gtest.h>

#include <cmath>

#include "ofdmml/numerics/conv.hpp"
#include "ofdmml/numerics/dft.hpp"
#include "ofdmml/numerics/linalg.hpp"
#include "ofdmml/numerics/rng.hpp"
#include "test_util.hpp"

namespace ofdmml {
namespace {

using testing::brute_force_dft;
using testing::gauss_jordan_inverse;
using testing::random_cvec;
using testing::random_matrix;

TEST(Dft, InversePairRoundTrip) {
  RngStream rng(1, 1);
  const CVec x = random_cvec(64, rng);
  EXPECT_LT(max_abs_diff(idft(dft(x)), x), 1e-12);
}

TEST(Dft, ConstantVectorIsDcOnly) {
  const cplx c{0.7, -1.3};
  const CVec x(64, c);
  const CVec X = dft(x);
  EXPECT_LT(std::abs(X[0] - c * 8.0), 1e-12);
  for (std::size_t k = 1; k < X.size(); ++k) EXPECT_LT(std::abs(X[k]), 1e-12);
}

TEST(Dft, MatchesBruteForceAtOddLength) {
  RngStream rng(1, 2);
  const CVec x = random_cvec(13, rng);
  EXPECT_LT(max_abs_diff(dft(x), brute_force_dft(x)), 1e-12);
  EXPECT_LT(max_abs_diff(idft(x), brute_force_dft(x, +1.0)), 1e-12);
}

TEST(Dft, MatchesBruteForceOnFastPath) {
  RngStream rng(1, 3);
  for (std::size_t n : {1u, 2u, 8u, 64u, 128u}) {
    const CVec x = random_cvec(n, rng);
    EXPECT_LT(max_abs_diff(dft(x), brute_force_dft(x)), 1e-12) << "n=" << n;
  }
}

TEST(Dft, Parseval) {
  RngStream rng(1, 4);
  for (std::size_t n : {13u, 64u, 100u}) {
    const CVec x = random_cvec(n, rng);
    const double ex = norm2(x);
    EXPECT_LT(std::abs(norm2(dft(x)) - ex) / ex, 1e-12);
  }
}

TEST(Dft, EmptyInputThrows) {
  EXPECT_THROW(dft(CVec{}), std::invalid_argument);
  EXPECT_THROW(idft(CVec{}), std::invalid_argument);
}

TEST(Conv, DeltaIsIdentity) {
  RngStream rng(2, 1);
  const CVec x = random_cvec(10, rng);
  const CVec y = conv(x, CVec{1.0});
  EXPECT_LT(max_abs_diff(y, x), 1e-15);
}

TEST(Conv, HandComputed) {
  const CVec y = conv(CVec{1.0, 1.0}, CVec{1.0, 1.0});
  ASSERT_EQ(y.size(), 3u);
  EXPECT_EQ(y[0], cplx(1.0));
  EXPECT_EQ(y[1], cplx(2.0));
  EXPECT_EQ(y[2], cplx(1.0));
}

TEST(Conv, CircularMatchesConvolutionTheorem) {
  RngStream rng(2, 2);
  const CVec x = random_cvec(64, rng);
  const CVec h = random_cvec(64, rng);
  const CVec X = dft(x);
  const CVec H = dft(h);
  CVec P(64);
  for (std::size_t k = 0; k < 64; ++k) P[k] = X[k] * H[k] * 8.0;  // sqrt(64)
  EXPECT_LT(max_abs_diff(circular_conv(x, h), idft(P)), 1e-12);
}

TEST(Conv, EmptyInputThrows) {
  EXPECT_THROW(conv(CVec{}, CVec{1.0}), std::invalid_argument);
  EXPECT_THROW(circular_conv(CVec{1.0}, CVec{}), std::invalid_argument);
}

TEST(Matrix, RejectsZeroDimensions) {
  EXPECT_THROW(CMat(0, 3), std::invalid_argument);
  EXPECT_THROW(RMat(2, 0), std::invalid_argument);
}

TEST(Pinv, IdentityIsItsOwnInverse) {
  const RMat i3 = RMat::identity(3);
  EXPECT_LT(max_abs_diff(pinv(i3), i3), 1e-15);
}

TEST(Pinv, DiagonalWithNullDirection) {
  const RMat d{{2.0, 0.0}, {0.0, 0.0}};
  const RMat expected{{0.5, 0.0}, {0.0, 0.0}};
  EXPECT_LT(max_abs_diff(pinv(d), expected), 1e-15);
}

TEST(Pinv, ZeroMatrixGivesZero) {
  const CMat z(4, 3);
  const CMat p = pinv(z);
  EXPECT_EQ(p.rows(), 3u);
  EXPECT_EQ(p.cols(), 4u);
  EXPECT_EQ(frobenius_norm(p), 0.0);
}

template <Scalar T>
void expect_penrose(const Matrix<T>& a, double tol) {
  const Matrix<T> p = pinv(a);
  const double na = frobenius_norm(a);
  const double np = frobenius_norm(p);
  EXPECT_LT(frobenius_norm(a * p * a - a) / na, tol);
  EXPECT_LT(frobenius_norm(p * a * p - p) / np, tol);
  const Matrix<T> ap = a * p;
  const Matrix<T> pa = p * a;
  EXPECT_LT(frobenius_norm(ap - adjoint(ap)), tol);
  EXPECT_LT(frobenius_norm(pa - adjoint(pa)), tol);
}

TEST(Pinv, PenroseIdentitiesRealTall) {
  RngStream rng(3, 1);
  const RMat a = random_matrix<double>(50, 2, rng);
  const RMat p = pinv(a);
  EXPECT_LT(max_abs_diff(a * p * a, a), 1e-10);
  expect_penrose(a, 1e-10);
}

TEST(Pinv, PenroseIdentitiesProperty) {
  // Random shapes, real and complex, including rank-deficient products.
  RngStream rng(3, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(12);
    const std::size_t n = 1 + rng.below(12);
    const std::size_t r = 1 + rng.below(std::min(m, n));
    const CMat a = random_matrix<cplx>(m, r, rng) * random_matrix<cplx>(r, n, rng);
    expect_penrose(a, 1e-9);
    const RMat b = random_matrix<double>(m, r, rng) * random_matrix<double>(r, n, rng);
    expect_penrose(b, 1e-9);
  }
}

TEST(Pinv, FullColumnRankMatchesNormalEquations) {
  RngStream rng(3, 3);
  const CMat a = random_matrix<cplx>(9, 4, rng);
  const CMat oracle = gauss_jordan_inverse(adjoint(a) * a) * adjoint(a);
  EXPECT_LT(max_abs_diff(pinv(a), oracle), 1e-9);
}

TEST(Svd, ReconstructsAndSortsProperty) {
  RngStream rng(3, 4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.below(15);
    const std::size_t n = 1 + rng.below(15);
    const CMat a = random_matrix<cplx>(m, n, rng);
    const Svd<cplx> d = svd(a);
    const std::size_t r = std::min(m, n);
    ASSERT_EQ(d.s.size(), r);
    for (std::size_t k = 1; k < r; ++k) EXPECT_GE(d.s[k - 1], d.s[k]);
    CMat us(m, r);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < r; ++k) us(i, k) = d.u(i, k) * d.s[k];
    EXPECT_LT(frobenius_norm(us * adjoint(d.v) - a) / frobenius_norm(a), 1e-12);
    EXPECT_LT(max_abs_diff(adjoint(d.v) * d.v, CMat::identity(r)), 1e-12);
  }
}

TEST(Lstsq, SquareNonsingularIsExactSolve) {
  RngStream rng(4, 1);
  const CMat a = random_matrix<cplx>(6, 6, rng);
  const CMat y = random_matrix<cplx>(6, 3, rng);
  EXPECT_LT(max_abs_diff(lstsq(a, y), gauss_jordan_inverse(a) * y), 1e-10);
}

TEST(Lstsq, OverdeterminedResidualIsOrthogonal) {
  RngStream rng(4, 2);
  const RMat a = random_matrix<double>(100, 50, rng);
  const RMat y = random_matrix<double>(100, 2, rng);
  const RMat b = lstsq(a, y);
  const RMat g = adjoint(a) * (a * b - y);
  EXPECT_LT(frobenius_norm(g) / (frobenius_norm(adjoint(a)) * frobenius_norm(y)), 1e-9);
  // Normal-equation oracle.
  const RMat oracle = gauss_jordan_inverse(adjoint(a) * a) * (adjoint(a) * y);
  EXPECT_LT(max_abs_diff(b, oracle), 1e-9);
}

TEST(Lstsq, ConsistentSystemHasZeroResidual) {
  RngStream rng(4, 3);
  const CMat a = random_matrix<cplx>(20, 5, rng);
  const CMat x = random_matrix<cplx>(5, 2, rng);
  const CMat y = a * x;
  EXPECT_LT(max_abs_diff(a * lstsq(a, y), y), 1e-10);
}

TEST(Lstsq, UnderdeterminedGivesMinimumNorm) {
  RngStream rng(4, 4);
  const RMat a = random_matrix<double>(3, 8, rng);
  const RMat y = random_matrix<double>(3, 1, rng);
  const RMat b = lstsq(a, y);
  EXPECT_LT(max_abs_diff(a * b, y), 1e-10);
  const RMat oracle = adjoint(a) * (gauss_jordan_inverse(a * adjoint(a)) * y);
  EXPECT_LT(max_abs_diff(b, oracle), 1e-10);
}

TEST(Lstsq, DimensionMismatchThrows) {
  EXPECT_THROW(lstsq(RMat(4, 2), RMat(3, 1)), std::invalid_argument);
}

TEST(Solvers, CholeskyAndLuAgree) {
  RngStream rng(5, 1);
  const CMat b = random_matrix<cplx>(7, 7, rng);
  CMat a = b * adjoint(b);
  for (std::size_t i = 0; i < 7; ++i) a(i, i) += 0.5;
  const CMat y = random_matrix<cplx>(7, 2, rng);
  const CMat x1 = cholesky_solve(a, y);
  const CMat x2 = lu_solve(a, y);
  EXPECT_LT(max_abs_diff(x1, x2), 1e-10);
  EXPECT_LT(max_abs_diff(a * x1, y), 1e-10);
}

TEST(Solvers, CholeskyRejectsIndefinite) {
  const RMat a{{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_THROW(cholesky_solve(a, RMat(2, 1, 1.0)), std::domain_error);
}

TEST(Rng, SameSeedAndStreamReproduce) {
  RngStream a(42, 7);
  RngStream b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(Rng, DistinctStreamsAreUncorrelated) {
  RngStream a(42, 1);
  RngStream b(42, 2);
  const int n = 100000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += a.normal() * b.normal();
  // Sample correlation of independent N(0,1) pairs has sd 1/sqrt(n).
  EXPECT_LT(std::abs(sab / n), 4.0 / std::sqrt(double(n)));
}

TEST(Rng, GaussianMoments) {
  RngStream r(9, 0);
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s1 += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(double(n)));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, ComplexNormalSplitsVarianceEvenly) {
  RngStream r(9, 1);
  const int n = 200000;
  double re2 = 0.0;
  double im2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx z = r.complex_normal(3.0);
    re2 += z.real() * z.real();
    im2 += z.imag() * z.imag();
  }
  EXPECT_NEAR(re2 / n, 1.5, 0.03);
  EXPECT_NEAR(im2 / n, 1.5, 0.03);
}

TEST(Rng, UniformAndBelowStayInRange) {
  RngStream r(9, 2);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Flops, CountsOnlyInsideScope) {
  FlopCounter c;
  RngStream rng(1, 1);
  const CVec x = random_cvec(64, rng);
  (void)dft(x);
  EXPECT_EQ(c.real_flops(), 0u);
  {
    FlopScope scope(c);
    (void)dft(x);
  }
  EXPECT_GT(c.get(Op::complex_mul), 0u);
  const auto before = c.real_flops();
  (void)dft(x);
  EXPECT_EQ(c.real_flops(), before);
}

}  // namespace
}  // namespace ofdmml

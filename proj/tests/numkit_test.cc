#include "lftident/numkit.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lftident/errors.hpp"

namespace lftident {
namespace {

using test::random_matrix;

Mat low_rank(std::uint64_t seed, Index m, Index n, Index r) {
  return random_matrix(seed, m, r) * random_matrix(seed + 1, r, n);
}

GTEST_TEST(NumkitTest, SvdFullSplitsRangeAndKernel) {
  const Mat A = low_rank(1, 6, 4, 2);
  const SvdFactors<double> f = svd_full<double>(A);
  EXPECT_EQ(f.rank, 2);
  EXPECT_EQ(f.U1.cols(), 2);
  EXPECT_EQ(f.U2.cols(), 4);
  EXPECT_EQ(f.V2.cols(), 2);
  EXPECT_LT((A * f.V2).norm(), 1e-12 * A.norm());
  EXPECT_LT((f.U2.transpose() * A).norm(), 1e-12 * A.norm());
  Mat U(6, 6);
  U << f.U1, f.U2;
  EXPECT_TRUE(U.transpose().isApprox(U.inverse(), 1e-12));
}

GTEST_TEST(NumkitTest, EmptyMatrices) {
  const Mat wide(0, 3), tall(3, 0);
  EXPECT_EQ(right_null_basis<double>(wide).cols(), 3);
  EXPECT_EQ(left_null_basis<double>(tall).rows(), 3);
  EXPECT_TRUE(is_fcr<double>(tall));
  EXPECT_FALSE(is_fcr<double>(wide));
  EXPECT_EQ(pinv<double>(tall).rows(), 0);
}

GTEST_TEST(NumkitTest, ScaleFloorRejectsNumericallyZeroProducts) {
  const Mat tiny = 1e-17 * random_matrix(3, 4, 2);
  EXPECT_EQ(rank_decision<double>(tiny).rank, 2);
  EXPECT_EQ(rank_decision<double>(tiny, RankTolerance{}.with_floor(1.0)).rank, 0);
  RankTolerance abs_tol;
  abs_tol.absolute = 1.0;
  EXPECT_EQ(rank_decision<double>(Mat::Identity(3, 3), abs_tol).rank, 0);
}

GTEST_TEST(NumkitTest, NullBasesComplex) {
  const CMat A = low_rank(4, 3, 5, 2).cast<Complex>() +
                 Complex(0, 1) * low_rank(4, 3, 5, 2).cast<Complex>();
  const CMat N = right_null_basis<Complex>(A);
  EXPECT_EQ(N.cols(), 3);
  EXPECT_LT((A * N).norm(), 1e-12 * A.norm());
  EXPECT_TRUE((N.adjoint() * N).isIdentity(1e-12));
  const CMat L = left_null_basis<Complex>(A);
  EXPECT_EQ(L.rows(), 1);
  EXPECT_LT((L * A).norm(), 1e-12 * A.norm());
}

GTEST_TEST(NumkitTest, PinvSatisfiesPenroseConditions) {
  const Mat A = low_rank(5, 5, 4, 3);
  const Mat X = pinv<double>(A);
  EXPECT_TRUE((A * X * A).isApprox(A, 1e-10));
  EXPECT_TRUE((X * A * X).isApprox(X, 1e-10));
  EXPECT_TRUE((A * X).transpose().isApprox(A * X, 1e-10));
  EXPECT_TRUE((X * A).transpose().isApprox(X * A, 1e-10));
}

GTEST_TEST(NumkitTest, SolvableAxb) {
  const Mat A = low_rank(6, 4, 3, 2), B = random_matrix(7, 2, 3);
  const Mat X0 = random_matrix(8, 3, 2);
  const SolveResult<double> ok = solvable_axb<double>(A, B, A * X0 * B);
  ASSERT_TRUE(ok.solvable);
  EXPECT_TRUE((A * *ok.X * B).isApprox(A * X0 * B, 1e-10));
  const SolveResult<double> bad = solvable_axb<double>(A, B, random_matrix(9, 4, 3));
  EXPECT_FALSE(bad.solvable);
  EXPECT_FALSE(bad.X.has_value());
}

GTEST_TEST(NumkitTest, PencilMatchesStandardEigenproblemForIdentityM) {
  const Mat R = random_matrix(10, 4, 4);
  const Mat S = R.transpose() * R;
  const PencilEigen pe = gen_eig_psd_pencil(S, Mat::Identity(4, 4));
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(pe.values(i), es.eigenvalues()(3 - i), 1e-10 * es.eigenvalues()(3));
  for (Index i = 0; i < 4; ++i) {
    const Vec x = pe.vectors.col(i);
    EXPECT_NEAR(x.squaredNorm(), 1.0, 1e-10);
    EXPECT_LT((S * x - pe.values(i) * x).norm(), 1e-9 * S.norm());
  }
}

GTEST_TEST(NumkitTest, PencilSentinelAndCommonKernel) {
  // e1: ker M only -> +inf; e2: regular; e3: common kernel -> dropped.
  const Mat S = Vec(Eigen::Vector3d(2.0, 3.0, 0.0)).asDiagonal();
  const Mat M = Vec(Eigen::Vector3d(0.0, 1.5, 0.0)).asDiagonal();
  const PencilEigen pe = gen_eig_psd_pencil(S, M);
  ASSERT_EQ(pe.values.size(), 2);
  EXPECT_TRUE(std::isinf(pe.values(0)));
  EXPECT_NEAR(pe.values(1), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(pe.vectors(0, 0)), 1.0, 1e-12);
}

GTEST_TEST(NumkitTest, PencilRejectsMismatchedShapes) {
  EXPECT_THROW(gen_eig_psd_pencil(Mat::Identity(2, 2), Mat::Identity(3, 3)), InvalidInput);
}

GTEST_TEST(NumkitTest, KronVecIdentity) {
  const CMat A = random_matrix(11, 3, 2).cast<Complex>() + Complex(0, 1) * random_matrix(12, 3, 2).cast<Complex>();
  const CMat X = random_matrix(13, 2, 4).cast<Complex>();
  const CMat B = random_matrix(14, 4, 3).cast<Complex>() - Complex(0, 2) * random_matrix(15, 4, 3).cast<Complex>();
  const CVec lhs = vec<Complex>(CMat(A * X * B));
  const CVec rhs = kron<Complex>(B.transpose(), A) * vec<Complex>(X);
  EXPECT_LT((lhs - rhs).norm(), 1e-12 * lhs.norm());
  EXPECT_EQ(unvec<Complex>(vec<Complex>(X), 2, 4), X);
  EXPECT_THROW(unvec<Complex>(vec<Complex>(X), 3, 3), InvalidInput);
}

GTEST_TEST(NumkitTest, RealifyActsLikeComplexMultiplication) {
  const CMat A = random_matrix(16, 3, 2).cast<Complex>() + Complex(0, 1) * random_matrix(17, 3, 2).cast<Complex>();
  const CVec x = random_matrix(18, 2, 1).cast<Complex>() + Complex(0, 1) * random_matrix(19, 2, 1).cast<Complex>();
  Vec xr(4);
  xr << x.real(), x.imag();
  const CVec y = A * x;
  Vec yr(6);
  yr << y.real(), y.imag();
  EXPECT_LT((realify(A) * xr - yr).norm(), 1e-12);
}

GTEST_TEST(NumkitTest, NullChainMatchesDirectStackRank) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index n = 3 + static_cast<Index>(s % 5);
    NullChain chain(n);
    Mat stack(0, n);
    for (int b = 0; b < 3; ++b) {
      const Index rows = 1 + static_cast<Index>((s + b) % 3);
      const Index r = std::min<Index>(rows, 1 + static_cast<Index>((s * 7 + b) % 2));
      const Mat blk = low_rank(1000 * s + b, rows, n, r);
      chain.add(blk);
      Mat next(stack.rows() + rows, n);
      next << stack, blk;
      stack = next;
    }
    const Index direct = n - rank_decision<double>(stack).rank;
    EXPECT_EQ(chain.dim(), direct) << "stack " << s;
    EXPECT_EQ(chain.dim() == 0, is_fcr<double>(stack)) << "stack " << s;
  }
}

GTEST_TEST(NumkitTest, SubspaceDistance) {
  const Mat Q = Eigen::HouseholderQR<Mat>(random_matrix(20, 5, 2)).householderQ() * Mat::Identity(5, 2);
  Eigen::Matrix2d rot;
  rot << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  EXPECT_LT(subspace_distance(Q, Q * rot), 1e-14);
  const Mat other = Eigen::HouseholderQR<Mat>(random_matrix(21, 5, 2)).householderQ() * Mat::Identity(5, 2);
  EXPECT_GT(subspace_distance(Q, other), 1e-3);
}

GTEST_TEST(NumkitTest, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

GTEST_TEST(NumkitTest, NonFiniteInputRejected) {
  Mat A = Mat::Identity(2, 2);
  A(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(svd_full<double>(A), InvalidInput);
}

}  // namespace
}  // namespace lftident

#include "lftident/oracle.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lftident/errors.hpp"

namespace lftident {
namespace {

GTEST_TEST(OracleTest, SisoJacobianClosedForm) {
  // dH/dtheta = 1 / (lambda + 1)^2 at theta = 0.
  const Mat J = fd_jacobian(test::siso1(), Vec::Zero(1), {0.0, 1.0}).J;
  ASSERT_EQ(J.rows(), 4);
  EXPECT_NEAR(J(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(J(1, 0), 0.0, 1e-9);
  EXPECT_NEAR(J(2, 0), 0.0, 1e-9);
  EXPECT_NEAR(J(3, 0), -0.5, 1e-9);
}

GTEST_TEST(OracleTest, FiniteDifferenceMatchesAnalytic) {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const DescriptorModel m = test::random_model(s, test::random_spec(s));
    const Vec th0 = test::random_theta(m, s);
    const std::vector<double> freqs{0.2, 1.5};
    const JacobianEstimate fd = fd_jacobian(m, th0, freqs);
    const Mat A = analytic_jacobian(m, th0, freqs);
    EXPECT_LT((fd.J - A).norm(), 1e-6 * std::max(1.0, A.norm())) << "seed " << s;
    EXPECT_LT(fd.halving_rel_change, 1e-4);
    EXPECT_GT(fd.h, 0.0);
  }
}

GTEST_TEST(OracleTest, StackedResponseLayout) {
  const DescriptorModel m = test::two_channel(1.0, 10.0);
  const Vec r = stacked_response(m, Vec::Zero(2), {0.0});
  ASSERT_EQ(r.size(), 8);
  // H(0) = diag(1, 10), real.
  EXPECT_DOUBLE_EQ(r(0), 1.0);
  EXPECT_DOUBLE_EQ(r(3), 10.0);
  EXPECT_DOUBLE_EQ(r.tail(4).norm(), 0.0);
}

GTEST_TEST(OracleTest, RankAndSloppinessOfJacobian) {
  Mat J(3, 2);
  J << 1, 0, 0, 0.1, 0, 0;
  EXPECT_TRUE(local_identifiability(J));
  const Vec v = jacobian_sloppiness(J);
  EXPECT_NEAR(v(0), 100.0, 1e-9);
  EXPECT_NEAR(v(1), 1.0, 1e-12);
  J(1, 1) = 1e-9;
  EXPECT_FALSE(local_identifiability(J));
  EXPECT_THROW(jacobian_sloppiness(J), InfiniteSloppiness);
}

GTEST_TEST(OracleTest, ProbeFindsDuplicatedParameterTwin) {
  const DescriptorModel m = test::dup2();
  const Vec th0 = Vec::Constant(2, 0.1);
  const std::vector<double> freqs{0.0, 1.0, 3.0};
  const EquivalenceProbe p = random_equivalence_probe(m, th0, freqs, 20, 5);
  ASSERT_TRUE(p.theta_star.has_value());
  EXPECT_GT((*p.theta_star - th0).norm(), 1e-3);
  EXPECT_LE(p.max_response_diff, 1e-10);
  EXPECT_TRUE(m.domain.contains(*p.theta_star));
  // Independent check of the claim.
  EXPECT_LT((stacked_response(m, *p.theta_star, freqs) - stacked_response(m, th0, freqs)).norm(), 1e-10);
}

GTEST_TEST(OracleTest, ProbeFindsNothingOnIdentifiableModel) {
  const DescriptorModel m = test::siso1();
  const EquivalenceProbe p = random_equivalence_probe(m, Vec::Zero(1), {0.0, 1.0}, 30, 5);
  EXPECT_FALSE(p.theta_star.has_value());
  EXPECT_GT(p.max_response_diff, 1e-6);
  EXPECT_GT(p.candidates_tried, 0);
}

GTEST_TEST(OracleTest, EllipsoidBoundaryRatiosShrinkLinearly) {
  const DescriptorModel m = test::random_model(8, test::random_spec(8));
  const Vec th0 = test::random_theta(m, 8);
  const std::vector<EllipsoidStats> st =
      ellipsoid_empirical_check(m, th0, {0.3, 1.1, 2.0}, {1e-2, 1e-3, 1e-4}, 40, 3);
  ASSERT_EQ(st.size(), 3u);
  double prev = std::numeric_limits<double>::infinity();
  for (const EllipsoidStats& e : st) {
    EXPECT_EQ(e.samples, 40);
    EXPECT_LE(e.min_ratio, e.mean_ratio);
    EXPECT_LE(e.mean_ratio, e.max_ratio);
    const double dev = std::max(e.max_ratio - 1.0, 1.0 - e.min_ratio);
    EXPECT_LT(dev, 10.0 * e.eps);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
}

}  // namespace
}  // namespace lftident

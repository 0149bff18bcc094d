#include "fixtures.hpp"

#include <cmath>
#include <random>

namespace lftident::test {

std::string data_path(const std::string& name) { return std::string(LFTIDENT_TEST_DATA_DIR) + "/" + name; }

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

}  // namespace

DescriptorModel siso1() {
  DescriptorModel m;
  m.dims = {1, 1, 1, 1, 1, 1};
  m.E = scalar(1);
  m.A_xx = scalar(-1);
  m.B_xu = scalar(1);
  m.B_xv = scalar(1);
  m.C_yx = scalar(1);
  m.C_zx = scalar(1);
  m.D_yu = scalar(0);
  m.D_yv = scalar(0);
  m.D_zu = scalar(0);
  m.D_zv = scalar(0);
  m.P = {scalar(1)};
  m.domain.radius = 0.5;
  return m;
}

DescriptorModel dup2() {
  DescriptorModel m = siso1();
  m.dims.q = 2;
  m.P = {scalar(1), scalar(1)};
  return m;
}

DescriptorModel two_channel(double g1, double g2) {
  DescriptorModel m;
  m.dims = {2, 2, 2, 2, 2, 2};
  m.E = Mat::Identity(2, 2);
  m.A_xx = -Mat::Identity(2, 2);
  m.B_xu = Vec(Eigen::Vector2d(g1, g2)).asDiagonal();
  m.B_xv = Mat::Identity(2, 2);
  m.C_yx = Mat::Identity(2, 2);
  m.C_zx = Mat::Identity(2, 2);
  m.D_yu = Mat::Zero(2, 2);
  m.D_yv = Mat::Zero(2, 2);
  m.D_zu = Mat::Zero(2, 2);
  m.D_zv = Mat::Zero(2, 2);
  Mat P1 = Mat::Zero(2, 2), P2 = Mat::Zero(2, 2);
  P1(0, 0) = 1;
  P2(1, 1) = 1;
  m.P = {P1, P2};
  m.domain.radius = 0.5;
  return m;
}

DescriptorModel hidden_parameter() {
  DescriptorModel m = siso1();
  m.B_xv = scalar(0);
  return m;
}

DescriptorModel oscillator() {
  DescriptorModel m;
  m.dims = {2, 1, 1, 1, 1, 1};
  m.E = Mat::Identity(2, 2);
  m.A_xx.resize(2, 2);
  m.A_xx << 0, 1, -1, 0;
  m.B_xu = Mat(2, 1);
  m.B_xu << 0, 1;
  m.B_xv = Mat(2, 1);
  m.B_xv << 0, 1;
  m.C_yx = Mat(1, 2);
  m.C_yx << 1, 0;
  m.C_zx = Mat(1, 2);
  m.C_zx << 1, 0;
  m.D_yu = scalar(0);
  m.D_yv = scalar(0);
  m.D_zu = scalar(0);
  m.D_zv = scalar(0);
  m.P = {scalar(1)};
  m.domain.radius = 0.5;
  return m;
}

Mat random_matrix(std::uint64_t seed, Index rows, Index cols) {
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> n01;
  Mat M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = n01(rng);
  return M;
}

CMat random_unitary(std::uint64_t seed, Index n) {
  const CMat Z = random_matrix(seed, n, n).cast<Complex>() +
                 Complex(0, 1) * random_matrix(seed + 77, n, n).cast<Complex>();
  Eigen::HouseholderQR<CMat> qr(Z);
  return qr.householderQ() * CMat::Identity(n, n);
}

RandomSpec random_spec(std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0xabcdefULL));
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomSpec s;
  s.m_x = pick(1, 4);
  s.m_u = pick(1, 3);
  s.m_y = pick(1, 3);
  s.m_z = pick(1, s.m_u);
  s.m_v = pick(1, 3);
  s.q = pick(1, std::min<int>(4, static_cast<int>(s.m_v * s.m_z)));
  s.discrete = pick(0, 3) == 0;
  s.descriptor = pick(0, 2) == 0;
  s.feedthrough = pick(0, 1) == 0;
  return s;
}

DescriptorModel random_model(std::uint64_t seed, const RandomSpec& s) {
  DescriptorModel m;
  m.time_domain = s.discrete ? TimeDomain::Discrete : TimeDomain::Continuous;
  m.dims = {s.m_x, s.m_u, s.m_y, s.m_z, s.m_v, s.q};
  std::uint64_t k = seed * 1315423911ULL;
  auto next = [&](Index r, Index c) { return random_matrix(++k, r, c); };
  const Index n = s.m_x;
  m.E = s.descriptor ? Mat(Mat::Identity(n, n) + 0.3 * next(n, n)) : Mat(Mat::Identity(n, n));
  Mat A0 = next(n, n);
  if (n > 0) {
    const Mat EinvA = m.E.partialPivLu().solve(A0);
    const Eigen::VectorXcd ev = EinvA.eigenvalues();
    if (s.discrete) {
      const double rho = ev.cwiseAbs().maxCoeff();
      A0 *= 0.7 / std::max(rho, 1e-3);
    } else {
      const double shift = ev.real().maxCoeff() + 1.0;
      A0 -= shift * m.E;
    }
  }
  m.A_xx = A0;
  m.B_xu = next(n, s.m_u);
  m.B_xv = next(n, s.m_v);
  m.C_yx = next(s.m_y, n);
  m.C_zx = next(s.m_z, n);
  m.D_yu = 0.5 * next(s.m_y, s.m_u);
  m.D_yv = 0.5 * next(s.m_y, s.m_v);
  m.D_zu = 0.5 * next(s.m_z, s.m_u);
  m.D_zv = s.feedthrough ? Mat(0.2 * next(s.m_z, s.m_v)) : Mat(Mat::Zero(s.m_z, s.m_v));
  double pmax = 0.0;
  for (Index i = 0; i < s.q; ++i) {
    m.P.push_back(next(s.m_v, s.m_z));
    pmax = std::max(pmax, m.P.back().norm());
  }
  // Keep ||P(theta)|| * ||D_zv|| and the closed-loop shift modest on the domain.
  m.domain.radius = 0.3 / std::max(1.0, pmax * std::sqrt(static_cast<double>(s.q)));
  return m;
}

Vec random_theta(const DescriptorModel& m, std::uint64_t seed, double fraction) {
  const Mat g = random_matrix(seed ^ 0x5151ULL, m.dims.q, 1);
  return fraction * m.domain.radius * g.col(0) / std::max(g.norm(), 1e-12);
}

}  // namespace lftident::test

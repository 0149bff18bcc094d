#include "lftident/sloppiness.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "lftident/errors.hpp"

namespace lftident {

PointwiseFactors pointwise_factors(const DescriptorModel& m, const Vec& theta0, double omega,
                                   const RankTolerance& tol) {
  PointwiseFactors f;
  f.omega = omega;
  const GBlocks g = g_blocks(m, omega);
  const RankTolerance yv_tol = tol.with_floor(std::max(tol.scale_floor, yv_reference_scale(m, g)));
  const SvdFactors<Complex> yv = svd_full<Complex>(g.yv, yv_tol);
  f.pi = pi_from_kernel(m, theta0, g, yv.V2, tol);
  f.r_yv = yv.rank;
  f.U_yv1 = yv.U1;
  f.V_yv1 = yv.V1;
  f.s_yv = yv.sigma.head(yv.rank);
  const SvdFactors<Complex> zu = svd_full<Complex>(g.zu, tol);
  if (zu.rank < m.dims.m_z)
    throw RankDrop("G_zu has row rank " + std::to_string(zu.rank) + " < m_z at omega = " +
                   std::to_string(omega));
  f.U_zu = zu.U1;
  f.V_zu1 = zu.V1;
  f.s_zu = zu.sigma.head(zu.rank);
  const CMat P0 = m.p_of(theta0).cast<Complex>();
  f.L0 = f.pi.L0;
  f.R0 = CMat::Identity(m.dims.m_z, m.dims.m_z) - g.zv * P0;
  f.Phi_l = f.L0 * f.V_yv1 * f.s_yv.cwiseInverse().cast<Complex>().asDiagonal();
  f.Phi_r = f.s_zu.cwiseInverse().cast<Complex>().asDiagonal() * f.U_zu.adjoint() * f.R0;
  return f;
}

PointwiseFactors rotated(const PointwiseFactors& f, const CMat& W_yv, const CMat& W_zu) {
  if (W_yv.rows() != f.r_yv || W_yv.cols() != f.r_yv || W_zu.rows() != f.U_zu.cols() ||
      W_zu.cols() != f.U_zu.cols())
    throw InvalidInput("rotated: rotation sizes do not match the factors");
  PointwiseFactors out = f;
  out.U_yv1 = f.U_yv1 * W_yv;
  out.Phi_l = f.Phi_l * W_yv;
  out.V_zu1 = f.V_zu1 * W_zu;
  out.Phi_r = W_zu.adjoint() * f.Phi_r;
  return out;
}

CMat dbar_from_xi(const Vec& xi, Index r, Index m_z) {
  if (xi.size() != 2 * r * m_z) throw InvalidInput("dbar_from_xi: size mismatch");
  CMat D(r, m_z);
  for (Index l = 0; l < m_z; ++l)
    for (Index i = 0; i < r; ++i) D(i, l) = Complex(xi(2 * l * r + i), xi((2 * l + 1) * r + i));
  return D;
}

Vec xi_from_dbar(const CMat& D) {
  const Index r = D.rows(), n = D.cols();
  Vec xi(2 * r * n);
  for (Index l = 0; l < n; ++l) {
    xi.segment(2 * l * r, r) = D.col(l).real();
    xi.segment((2 * l + 1) * r, r) = D.col(l).imag();
  }
  return xi;
}

QPair q_pair(const PointwiseFactors& f, std::uint64_t seed) {
  const Index r = f.r_yv, nz = f.Phi_r.rows();
  const Mat a = f.Phi_l.real(), b = f.Phi_l.imag();
  const Mat c = f.Phi_r.real(), d = f.Phi_r.imag();
  const Mat ct = c.transpose(), dt = d.transpose();
  // Columns acting on [vec Re Dbar; vec Im Dbar].
  const Mat r_re = kron<double>(ct, a) - kron<double>(dt, b);
  const Mat r_im = -kron<double>(dt, a) - kron<double>(ct, b);
  const Mat j_re = kron<double>(dt, a) + kron<double>(ct, b);
  const Mat j_im = kron<double>(ct, a) - kron<double>(dt, b);
  const Index rows = a.rows() * nz;
  QPair q{Mat(rows, 2 * r * nz), Mat(rows, 2 * r * nz)};
  // Reorder to xi = vec(col{Re Dbar, Im Dbar}): per column l of Dbar the real
  // block precedes the imaginary block.
  for (Index l = 0; l < nz; ++l) {
    q.Q_r.middleCols(2 * l * r, r) = r_re.middleCols(l * r, r);
    q.Q_r.middleCols((2 * l + 1) * r, r) = r_im.middleCols(l * r, r);
    q.Q_j.middleCols(2 * l * r, r) = j_re.middleCols(l * r, r);
    q.Q_j.middleCols((2 * l + 1) * r, r) = j_im.middleCols(l * r, r);
  }

  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    Vec xi(2 * r * nz);
    for (Index i = 0; i < xi.size(); ++i) xi(i) = n01(rng);
    const CMat prod = f.Phi_l * dbar_from_xi(xi, r, nz) * f.Phi_r;
    const Vec want_r = vec<double>(Mat(prod.real())), want_j = vec<double>(Mat(prod.imag()));
    const double scale = std::max(1.0, prod.norm());
    const double err = std::max((q.Q_r * xi - want_r).norm(), (q.Q_j * xi - want_j).norm()) / scale;
    if (!(err <= 1e-10))
      throw ConstructionError("Q_r/Q_j fail the vectorization identity (rel err " +
                              std::to_string(err) + ")");
  }
  return q;
}

GammaOmega gamma_omega(const PsiDecomposition& ps, std::vector<PointwiseFactors> factors, Index m_z) {
  if (factors.empty()) throw InvalidInput("gamma_omega: no frequencies");
  GammaOmega go;
  go.psi = ps;
  go.m_z = m_z;
  go.factors = std::move(factors);
  const std::size_t N = go.factors.size();
  const Index n = ps.Psi.rows();
  const Index q1 = ps.U1.cols(), q2 = ps.U2.cols();
  const Mat Iz = Mat::Identity(m_z, m_z);
  std::vector<Mat> Br, Bj;
  Index a_cols = 0, x_cols = 0;
  for (std::size_t i = 0; i < N; ++i) {
    go.q.push_back(q_pair(go.factors[i], 5 + i));
    Br.push_back(kron<double>(Iz, go.factors[i].pi.Pi_r_bar));
    Bj.push_back(kron<double>(Iz, go.factors[i].pi.Pi_j_bar));
    go.a_offsets.push_back(a_cols);
    go.xi_offsets.push_back(x_cols);
    a_cols += Br.back().cols();
    x_cols += go.q.back().Q_r.cols();
  }
  const Index rows = static_cast<Index>(N - 1) * q1 + static_cast<Index>(N) * (q2 + n);
  go.Gamma = Mat::Zero(rows, a_cols);
  go.Omega = Mat::Zero(rows, x_cols);
  const Mat U1t = ps.U1.transpose(), U2t = ps.U2.transpose();
  Index row = 0;
  for (std::size_t i = 1; i < N; ++i) {
    go.Gamma.block(row, go.a_offsets[0], q1, Br[0].cols()) = U1t * Br[0];
    go.Gamma.block(row, go.a_offsets[i], q1, Br[i].cols()) = -U1t * Br[i];
    go.Omega.block(row, go.xi_offsets[0], q1, go.q[0].Q_r.cols()) = U1t * go.q[0].Q_r;
    go.Omega.block(row, go.xi_offsets[i], q1, go.q[i].Q_r.cols()) = -U1t * go.q[i].Q_r;
    row += q1;
  }
  for (std::size_t i = 0; i < N; ++i) {
    go.Gamma.block(row, go.a_offsets[i], q2, Br[i].cols()) = U2t * Br[i];
    go.Omega.block(row, go.xi_offsets[i], q2, go.q[i].Q_r.cols()) = U2t * go.q[i].Q_r;
    row += q2;
  }
  for (std::size_t i = 0; i < N; ++i) {
    go.Gamma.block(row, go.a_offsets[i], n, Bj[i].cols()) = Bj[i];
    go.Omega.block(row, go.xi_offsets[i], n, go.q[i].Q_j.cols()) = go.q[i].Q_j;
    row += n;
  }
  return go;
}

GammaOmega gamma_omega(const DescriptorModel& m, const Vec& theta0, const std::vector<double>& freqs,
                       const RankTolerance& tol) {
  validate_shapes(m);
  check_theta(m, theta0);
  check_frequencies(m, freqs);
  std::vector<PointwiseFactors> factors;
  for (double w : freqs) factors.push_back(pointwise_factors(m, theta0, w, tol));
  return gamma_omega(psi(m, tol), std::move(factors), m.dims.m_z);
}

SMatrices s_matrices(const GammaOmega& go, const RankTolerance& tol) {
  if (!go.psi.fcr)
    throw GammaRankDeficient("Psi is not of full column rank; the parameters are not identifiable");
  double pi_scale = 0.0;
  for (const PointwiseFactors& f : go.factors) pi_scale = std::max(pi_scale, f.pi.scale);
  const RankTolerance gtol = tol.with_floor(std::max(tol.scale_floor, pi_scale));
  if (!is_fcr<double>(go.Gamma, gtol))
    throw GammaRankDeficient(
        "Gamma is not of full column rank: the parameters are not identifiable from these "
        "frequencies");
  SMatrices S;
  S.go = go;
  const Mat range = range_basis<double>(go.Gamma, gtol);
  const Mat perp_omega = go.Omega - range * (range.transpose() * go.Omega);
  const double omega_norm =
      go.Omega.size() ? Eigen::BDCSVD<Mat>(go.Omega).singularValues()(0) : 0.0;
  S.S_H = right_null_basis<double>(perp_omega, tol.with_floor(std::max(tol.scale_floor, omega_norm)));
  S.n_s = S.S_H.cols();
  S.S_A = pinv<double>(go.Gamma, gtol) * go.Omega * S.S_H;

  const Mat VSU = go.psi.V * go.psi.sigma.cwiseInverse().asDiagonal() * go.psi.U1.transpose();
  const Mat Iz = Mat::Identity(go.m_z, go.m_z);
  S.M = Mat::Zero(S.n_s, S.n_s);
  for (std::size_t k = 0; k < go.factors.size(); ++k) {
    const PointwiseFactors& f = go.factors[k];
    const Index xr = go.q[k].Q_r.cols();
    const Index ar = 2 * f.pi.c * go.m_z;
    const Mat SHk = S.S_H.middleRows(go.xi_offsets[k], xr);
    const Mat SAk = S.S_A.middleRows(go.a_offsets[k], ar);
    // Psi (theta - theta0) = Q_r xi + (I (x) Pibar_r) a with a = -S_A xi.
    S.S_k.push_back(VSU * (go.q[k].Q_r * SHk - kron<double>(Iz, f.pi.Pi_r_bar) * SAk));
    const CMat basis = kron<Complex>(f.V_zu1.conjugate(), f.U_yv1);
    CMat vecs(f.r_yv * go.m_z, S.n_s);
    for (Index c = 0; c < S.n_s; ++c)
      vecs.col(c) = vec<Complex>(dbar_from_xi(SHk.col(c), f.r_yv, go.m_z));
    S.S_tilde.push_back(basis * vecs);
    S.M += (S.S_tilde.back().adjoint() * S.S_tilde.back()).real();
  }
  S.M = 0.5 * (S.M + S.M.transpose());
  return S;
}

bool EllipsoidModel::contains(const Vec& xi) const { return xi.dot(M * xi) <= eps * eps; }

Vec EllipsoidModel::theta_offset(const Vec& xi) const { return S_k * xi; }

Vec EllipsoidModel::boundary_point(const Vec& u) const {
  const double quad = u.dot(M * u);
  if (!(quad > 0)) throw InvalidInput("boundary_point: direction has zero M-norm");
  return eps * u / std::sqrt(quad);
}

EllipsoidModel frobenius_ellipsoid(const SMatrices& S, double eps, Index k) {
  if (!(eps > 0) || !std::isfinite(eps)) throw InvalidInput("eps must be positive and finite");
  if (k < 0 || k >= static_cast<Index>(S.S_k.size())) throw InvalidInput("k out of range");
  return EllipsoidModel{S.M, S.S_k[static_cast<std::size_t>(k)], eps, k};
}

SloppinessReport metrics(const SMatrices& S, Index k, const RankTolerance& tol) {
  if (k < 0 || k >= static_cast<Index>(S.S_k.size())) throw InvalidInput("k out of range");
  const Mat& Sk = S.S_k[static_cast<std::size_t>(k)];
  const PencilEigen pe = gen_eig_psd_pencil(Sk.transpose() * Sk, S.M, tol);
  SloppinessReport r;
  r.k = k;
  r.n_s = S.n_s;
  for (const PointwiseFactors& f : S.go.factors) r.freqs.push_back(f.omega);
  r.mu = pe.values;
  r.directions.resize(Sk.rows(), pe.values.size());
  for (Index i = 0; i < pe.values.size(); ++i) {
    Vec d = Sk * pe.vectors.col(i);
    const double nd = d.norm();
    r.directions.col(i) = nd > 0 ? Vec(d / nd) : d;
  }
  r.sm_absolute = r.mu.size() ? std::sqrt(r.mu(0)) : 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  for (Index i = 0; i + 1 < r.mu.size(); ++i) {
    const double a = r.mu(i), b = r.mu(i + 1);
    r.sm_relative.push_back(std::isinf(a) ? inf : (b > 0 ? std::sqrt(a / b) : inf));
  }
  return r;
}

bool spectral_membership(const SMatrices& S, const Vec& xi, double eps) {
  if (xi.size() != S.n_s) throw InvalidInput("spectral_membership: xi has wrong length");
  for (std::size_t k = 0; k < S.go.factors.size(); ++k) {
    const PointwiseFactors& f = S.go.factors[k];
    const Vec xk = S.S_H.middleRows(S.go.xi_offsets[k], S.go.q[k].Q_r.cols()) * xi;
    const CMat dH = f.U_yv1 * dbar_from_xi(xk, f.r_yv, S.go.m_z) * f.V_zu1.adjoint();
    if (dH.size() && Eigen::JacobiSVD<CMat>(dH).singularValues()(0) > eps) return false;
  }
  return true;
}

SloppinessAnalysis analyze_sloppiness(const DescriptorModel& m, const Vec& theta0,
                                      const std::vector<double>& freqs, Index k,
                                      const RankTolerance& tol) {
  SloppinessAnalysis a;
  a.S = s_matrices(gamma_omega(m, theta0, freqs, tol), tol);
  a.report = metrics(a.S, k, tol);
  return a;
}

}  // namespace lftident

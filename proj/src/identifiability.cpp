#include "lftident/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lftident/errors.hpp"

namespace lftident {

PsiDecomposition psi(const DescriptorModel& m, const RankTolerance& tol) {
  const Index n = m.dims.m_v * m.dims.m_z;
  PsiDecomposition d;
  d.Psi.resize(n, m.dims.q);
  for (Index k = 0; k < m.dims.q; ++k) d.Psi.col(k) = vec<double>(m.P[static_cast<std::size_t>(k)]);
  const SvdFactors<double> f = svd_full<double>(d.Psi, tol);
  d.U1 = f.U1;
  d.U2 = f.U2;
  d.V = Mat(m.dims.q, m.dims.q);
  d.V << f.V1, f.V2;
  d.sigma = f.sigma;
  d.rank = f.rank;
  d.fcr = f.rank == m.dims.q;
  return d;
}

double yv_reference_scale(const DescriptorModel& m, const GBlocks& g) {
  auto norm2 = [](const Mat& A) {
    return A.size() == 0 ? 0.0 : Eigen::JacobiSVD<Mat>(A).singularValues()(0);
  };
  double s = norm2(m.D_yv);
  if (m.dims.m_x > 0 && g.pencil_sigma_min > 0 && std::isfinite(g.pencil_sigma_min))
    s += norm2(m.C_yx) * norm2(m.B_xv) / g.pencil_sigma_min;
  return s;
}

CMat yv_kernel_basis(const DescriptorModel& m, const GBlocks& g, const RankTolerance& tol) {
  return right_null_basis<Complex>(g.yv, tol.with_floor(std::max(tol.scale_floor, yv_reference_scale(m, g))));
}

void check_theta(const DescriptorModel& m, const Vec& theta0) {
  if (theta0.size() != m.dims.q)
    throw InvalidInput("theta0 has " + std::to_string(theta0.size()) + " entries, expected q = " +
                       std::to_string(m.dims.q));
  if (!m.domain.contains(theta0)) throw InvalidInput("theta0 lies outside the parameter domain");
}

PiDecomposition pi_from_kernel(const DescriptorModel& m, const Vec& theta0, const GBlocks& g,
                               const CMat& K, const RankTolerance& tol) {
  const Index nv = m.dims.m_v;
  if (K.rows() != nv) throw InvalidInput("pi_from_kernel: kernel basis has wrong row count");
  PiDecomposition d;
  d.omega = g.omega;
  const CMat P0 = m.p_of(theta0).cast<Complex>();
  d.L0 = CMat::Identity(nv, nv) - P0 * g.zv;
  {
    const Vec s = Eigen::JacobiSVD<CMat>(d.L0).singularValues();
    if (!(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0))))
      throw PoleProximity("I - P(theta0) G_zv is singular at omega = " + std::to_string(g.omega));
  }
  d.K = K;
  d.Pi = d.L0 * K;
  d.c = K.cols();
  d.scale = d.c > 0 ? Eigen::JacobiSVD<CMat>(d.Pi).singularValues()(0) : 0.0;
  d.Pi_r_bar.resize(nv, 2 * d.c);
  d.Pi_r_bar << d.Pi.real(), -d.Pi.imag();
  d.Pi_j_bar.resize(nv, 2 * d.c);
  d.Pi_j_bar << d.Pi.imag(), d.Pi.real();
  const RankTolerance scaled = tol.with_floor(std::max(tol.scale_floor, d.scale));
  const Mat Nj = right_null_basis<double>(d.Pi_j_bar, scaled);
  d.shortcut = Nj.cols() == 0;
  const Mat X = d.Pi_r_bar * Nj;  // spans the real vectors in range(Pi)
  d.side_condition = is_fcr<double>(X, scaled);
  d.Xi = d.shortcut ? Mat(Mat::Identity(nv, nv)) : left_null_basis<double>(X, scaled);
  const CMat U2 = svd_full<Complex>(d.Pi, tol).U2;
  d.U2_real.resize(2 * U2.cols(), nv);
  d.U2_real << U2.real().transpose(), U2.imag().transpose();
  return d;
}

PiDecomposition pi_at(const DescriptorModel& m, const Vec& theta0, double omega,
                      const RankTolerance& tol) {
  const GBlocks g = g_blocks(m, omega);
  return pi_from_kernel(m, theta0, g, yv_kernel_basis(m, g, tol), tol);
}

bool single_freq_shortcut(const PiDecomposition& pi) { return pi.shortcut; }

Mat upsilon_matrix(const PsiDecomposition& ps, const std::vector<PiDecomposition>& pis, Index m_z) {
  const Mat Iz = Mat::Identity(m_z, m_z);
  std::vector<Mat> blocks;
  blocks.push_back(ps.U2.transpose());
  for (std::size_t i = 0; i < pis.size(); ++i)
    blocks.push_back(kron<double>(Iz, i == 0 ? pis[i].Xi : pis[i].U2_real));
  Index rows = 0;
  for (const Mat& b : blocks) rows += b.rows();
  Mat out(rows, ps.Psi.rows());
  Index r = 0;
  for (const Mat& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

const char* to_string(IdentStatus s) {
  switch (s) {
    case IdentStatus::Identifiable: return "Identifiable";
    case IdentStatus::NotIdentifiable: return "NotIdentifiable";
    case IdentStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

IdentifiabilityVerdict upsilon_from(const PsiDecomposition& ps,
                                    const std::vector<PiDecomposition>& pis, Index m_z,
                                    const RankTolerance& tol) {
  IdentifiabilityVerdict v;
  v.psi_fcr = ps.fcr;
  v.psi_rank = ps.rank;
  for (const PiDecomposition& p : pis) {
    v.freqs.push_back(p.omega);
    v.side_condition_ok = v.side_condition_ok && p.side_condition;
    if (p.shortcut && !v.shortcut_frequency) v.shortcut_frequency = p.omega;
  }
  const Mat Iz = Mat::Identity(m_z, m_z);
  const RankTolerance unit = tol.with_floor(std::max(tol.scale_floor, 1.0));
  NullChain chain(ps.U1);
  v.rank_trace.push_back(chain.dim());
  for (std::size_t i = 0; i < pis.size(); ++i)
    v.rank_trace.push_back(chain.add(kron<double>(Iz, i == 0 ? pis[i].Xi : pis[i].U2_real), unit));
  v.residual_basis = chain.basis();
  v.residual_dim = chain.dim();
  if (!ps.fcr) {
    v.status = IdentStatus::NotIdentifiable;
    v.residual_dim = ps.Psi.cols() - ps.rank;
    v.residual_direction = ps.V.col(ps.Psi.cols() - 1);
    v.residual_certified = true;
    v.reason = "Psi is not of full column rank: distinct parameters give the same P(theta)";
  } else if (v.residual_dim == 0) {
    v.status = IdentStatus::Identifiable;
    v.reason = v.shortcut_frequency ? "single-frequency shortcut holds" : "Upsilon has full column rank";
  } else {
    v.status = IdentStatus::Inconclusive;
    v.reason = "Upsilon is column-rank deficient on the given frequencies";
  }
  return v;
}

namespace {

bool loop_invertible(const DescriptorModel& m, const Vec* theta0, double omega) {
  if (near_pole(m, omega)) return false;
  if (!theta0) return true;
  const GBlocks g = g_blocks(m, omega);
  const CMat L0 = CMat::Identity(m.dims.m_v, m.dims.m_v) - m.p_of(*theta0).cast<Complex>() * g.zv;
  const Vec s = Eigen::JacobiSVD<CMat>(L0).singularValues();
  return s(s.size() - 1) > 1e-8 * std::max(1.0, s(0));
}

std::vector<double> draw_frequencies(const DescriptorModel& m, const Vec* theta0, std::size_t count,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  for (int tries = 0; out.size() < count; ++tries) {
    if (tries > 10000) throw NumericalInconsistency("could not draw pole-free probe frequencies");
    const double w = m.time_domain == TimeDomain::Continuous
                         ? std::pow(10.0, -2.0 + 4.0 * u(rng))
                         : std::numbers::pi * (0.02 + 0.96 * u(rng));
    if (std::find(out.begin(), out.end(), w) != out.end()) continue;
    if (loop_invertible(m, theta0, w)) out.push_back(w);
  }
  return out;
}

}  // namespace

std::vector<double> generic_frequencies(const DescriptorModel& m, const Vec& theta0,
                                        std::size_t count, std::uint64_t seed) {
  return draw_frequencies(m, &theta0, count, seed);
}

FnrrReport g_zu_normal_row_rank(const DescriptorModel& m, std::uint64_t seed, const RankTolerance& tol) {
  FnrrReport r;
  r.probe_freqs = draw_frequencies(m, nullptr, 3, seed);
  for (double w : r.probe_freqs) {
    const GBlocks g = g_blocks(m, w);
    r.ranks.push_back(rank_decision<Complex>(g.zu, tol).rank);
  }
  r.normal_row_rank = *std::max_element(r.ranks.begin(), r.ranks.end());
  r.consistent = std::all_of(r.ranks.begin(), r.ranks.end(),
                             [&](Index k) { return k == r.normal_row_rank; });
  r.full = r.normal_row_rank == m.dims.m_z;
  return r;
}

FnrrReport require_fnrr(const DescriptorModel& m, std::uint64_t seed, const RankTolerance& tol) {
  FnrrReport r = g_zu_normal_row_rank(m, seed, tol);
  if (!r.full)
    throw FnrrViolation("G_zu has normal row rank " + std::to_string(r.normal_row_rank) + " < m_z = " +
                        std::to_string(m.dims.m_z));
  if (!r.consistent)
    throw FnrrViolation("G_zu row rank differs between generic probe frequencies; rank decision is "
                        "ill-conditioned");
  return r;
}

Index sufficient_count(const DescriptorModel& m) { return 2 * m.dims.m_x + 1; }

IdentifiabilityVerdict upsilon_test(const DescriptorModel& m, const Vec& theta0,
                                    const std::vector<double>& freqs, const IdentOptions& opts) {
  validate_shapes(m);
  check_theta(m, theta0);
  check_frequencies(m, freqs);
  const PsiDecomposition ps = psi(m, opts.tol);
  if (ps.fcr) require_fnrr(m, opts.seed, opts.tol);
  std::vector<PiDecomposition> pis;
  for (double w : freqs) pis.push_back(pi_at(m, theta0, w, opts.tol));
  IdentifiabilityVerdict v = upsilon_from(ps, pis, m.dims.m_z, opts.tol);
  if (v.status != IdentStatus::Inconclusive || !opts.certify) return v;

  // The residual condition G_yv L0^{-1} Delta P = 0 is a polynomial identity of
  // degree at most m_x in lambda, so surviving 2 m_x + 1 generic probes means it
  // holds at every frequency.
  v.certification_freqs =
      generic_frequencies(m, theta0, static_cast<std::size_t>(sufficient_count(m)), opts.seed + 1);
  const Mat Iz = Mat::Identity(m.dims.m_z, m.dims.m_z);
  const RankTolerance unit = opts.tol.with_floor(std::max(opts.tol.scale_floor, 1.0));
  NullChain chain(v.residual_basis);
  for (double w : v.certification_freqs)
    chain.add(kron<double>(Iz, pi_at(m, theta0, w, opts.tol).U2_real), unit);
  if (chain.dim() > 0) {
    v.status = IdentStatus::NotIdentifiable;
    v.residual_certified = true;
    v.residual_basis = chain.basis();
    v.residual_dim = chain.dim();
    Vec dir = pinv<double>(ps.Psi, opts.tol) * chain.basis().col(0);
    v.residual_direction = dir.normalized();
    v.reason = "a parameter perturbation leaves the response unchanged at every frequency";
  } else {
    v.reason = "the given frequencies are insufficient; more frequencies make the system identifiable";
  }
  return v;
}

}  // namespace lftident

#include "lftident/response.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lftident/errors.hpp"

namespace lftident {

Complex lambda_at(TimeDomain td, double omega) {
  if (td == TimeDomain::Continuous) return Complex(0.0, omega);
  return std::polar(1.0, omega);
}

namespace {

double spectral_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(A).singularValues()(0);
}

double sigma_min(const CMat& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  const Vec s = Eigen::JacobiSVD<CMat>(M).singularValues();
  return s(s.size() - 1);
}

double pencil_guard(const DescriptorModel& m, const Mat& A) {
  return kPoleGuard * std::max(spectral_norm(A), spectral_norm(m.E));
}

std::string describe(Complex lam) {
  return "lambda = (" + std::to_string(lam.real()) + ", " + std::to_string(lam.imag()) + ")";
}

// (I - X)^{-1} rhs with a singularity check; singular means a closed-loop pole.
CMat solve_guarded(const CMat& L, const CMat& rhs, const char* what) {
  if (L.rows() == 0) return rhs;
  const Vec s = Eigen::JacobiSVD<CMat>(L).singularValues();
  if (!(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0))))
    throw PoleProximity(std::string(what) + ": feedback loop is singular at this frequency");
  return L.partialPivLu().solve(rhs);
}

}  // namespace

bool near_pole(const DescriptorModel& m, double omega) {
  const Complex lam = lambda_at(m.time_domain, omega);
  const CMat pencil = lam * m.E.cast<Complex>() - m.A_xx.cast<Complex>();
  return !(sigma_min(pencil) > pencil_guard(m, m.A_xx));
}

GBlocks g_blocks_at(const DescriptorModel& m, Complex lam) {
  GBlocks g;
  g.lambda = lam;
  const CMat pencil = lam * m.E.cast<Complex>() - m.A_xx.cast<Complex>();
  g.pencil_sigma_min = sigma_min(pencil);
  if (!(g.pencil_sigma_min > pencil_guard(m, m.A_xx)))
    throw PoleProximity("open-loop pencil is singular at " + describe(lam));
  const Index nu = m.dims.m_u, nv = m.dims.m_v;
  CMat Bcat(m.dims.m_x, nu + nv);
  Bcat << m.B_xu.cast<Complex>(), m.B_xv.cast<Complex>();
  CMat X = m.dims.m_x > 0 ? CMat(pencil.partialPivLu().solve(Bcat)) : Bcat;
  const CMat Cy = m.C_yx.cast<Complex>(), Cz = m.C_zx.cast<Complex>();
  g.yu = m.D_yu.cast<Complex>() + Cy * X.leftCols(nu);
  g.yv = m.D_yv.cast<Complex>() + Cy * X.rightCols(nv);
  g.zu = m.D_zu.cast<Complex>() + Cz * X.leftCols(nu);
  g.zv = m.D_zv.cast<Complex>() + Cz * X.rightCols(nv);
  return g;
}

GBlocks g_blocks(const DescriptorModel& m, double omega) {
  if (!std::isfinite(omega)) throw InvalidInput("frequency must be finite");
  GBlocks g = g_blocks_at(m, lambda_at(m.time_domain, omega));
  g.omega = omega;
  return g;
}

CMat h_lft(const DescriptorModel& m, const GBlocks& g, const Vec& theta) {
  const CMat P = m.p_of(theta).cast<Complex>();
  const CMat L = CMat::Identity(m.dims.m_v, m.dims.m_v) - P * g.zv;
  return g.yu + g.yv * solve_guarded(L, P * g.zu, "h_lft");
}

CMat h_lft(const DescriptorModel& m, const Vec& theta, double omega) {
  return h_lft(m, g_blocks(m, omega), theta);
}

CMat h_statespace(const DescriptorModel& m, const Vec& theta, double omega) {
  const ClosedLoop cl = assemble(m, theta);
  const Complex lam = lambda_at(m.time_domain, omega);
  const CMat pencil = lam * m.E.cast<Complex>() - cl.A.cast<Complex>();
  if (!(sigma_min(pencil) > pencil_guard(m, cl.A)))
    throw PoleProximity("closed-loop pencil is singular at " + describe(lam));
  const CMat B = cl.B.cast<Complex>();
  const CMat X = m.dims.m_x > 0 ? CMat(pencil.partialPivLu().solve(B)) : B;
  return cl.D.cast<Complex>() + cl.C.cast<Complex>() * X;
}

namespace {

Complex det_of(const CMat& M) {
  if (M.rows() == 0) return Complex(1.0, 0.0);
  return M.partialPivLu().determinant();
}

}  // namespace

double regularity_identity_check(const DescriptorModel& m, const Vec& theta,
                                 const std::vector<Complex>& probes) {
  const Index nx = m.dims.m_x, nz = m.dims.m_z, nv = m.dims.m_v;
  const Mat Pt = m.p_of(theta);
  const CMat P = Pt.cast<Complex>();
  const ClosedLoop cl = assemble(m, theta);
  double worst = 0.0;
  for (const Complex& lam : probes) {
    const CMat E = m.E.cast<Complex>();
    const Complex closed = det_of(lam * E - cl.A.cast<Complex>()) *
                           det_of(CMat::Identity(nv, nv) - P * m.D_zv.cast<Complex>());
    const GBlocks g = g_blocks_at(m, lam);
    const Complex open = det_of(lam * E - m.A_xx.cast<Complex>());
    const Complex right = open * det_of(CMat::Identity(nz, nz) - g.zv * P);
    const Complex left = open * det_of(CMat::Identity(nv, nv) - P * g.zv);
    CMat aug = CMat::Zero(nx + nz, nx + nz);
    aug.topLeftCorner(nx, nx) = lam * E - m.A_xx.cast<Complex>();
    aug.topRightCorner(nx, nz) = -m.B_xv.cast<Complex>() * P;
    aug.bottomLeftCorner(nz, nx) = -m.C_zx.cast<Complex>();
    aug.bottomRightCorner(nz, nz) = CMat::Identity(nz, nz) - m.D_zv.cast<Complex>() * P;
    const Complex augmented = det_of(aug);
    const Complex all[] = {closed, right, left, augmented};
    double scale = 0.0;
    for (const Complex& v : all) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) continue;
    for (const Complex& a : all)
      for (const Complex& b : all) worst = std::max(worst, std::abs(a - b) / scale);
  }
  return worst;
}

CMat delta_h(const DescriptorModel& m, const Vec& theta, const Vec& theta0, double omega) {
  const GBlocks g = g_blocks(m, omega);
  const Index nz = m.dims.m_z, nv = m.dims.m_v;
  const CMat P0 = m.p_of(theta0).cast<Complex>();
  const CMat dP = m.p_of(theta).cast<Complex>() - P0;
  const CMat L0 = CMat::Identity(nv, nv) - P0 * g.zv;
  const CMat R0 = CMat::Identity(nz, nz) - g.zv * P0;
  const CMat left = solve_guarded(L0, dP, "delta_h");          // L0^{-1} dP
  const CMat R0inv_zv_dP = solve_guarded(R0, g.zv * dP, "delta_h");
  const CMat R0inv_zu = solve_guarded(R0, g.zu, "delta_h");
  const CMat inner = CMat::Identity(nz, nz) - R0inv_zv_dP;
  return g.yv * left * solve_guarded(inner, R0inv_zu, "delta_h");
}

std::vector<CMat> h_gradient(const DescriptorModel& m, const Vec& theta0, double omega) {
  const GBlocks g = g_blocks(m, omega);
  const Index nz = m.dims.m_z, nv = m.dims.m_v;
  const CMat P0 = m.p_of(theta0).cast<Complex>();
  const CMat L0 = CMat::Identity(nv, nv) - P0 * g.zv;
  const CMat R0 = CMat::Identity(nz, nz) - g.zv * P0;
  // G_yv L0^{-1} computed as (L0^{-T} G_yv^T)^T.
  const CMat yvL = solve_guarded(L0.transpose(), g.yv.transpose(), "h_gradient").transpose();
  const CMat Rzu = solve_guarded(R0, g.zu, "h_gradient");
  std::vector<CMat> out;
  for (const Mat& Pk : m.P) out.push_back(yvL * Pk.cast<Complex>() * Rzu);
  return out;
}

void check_frequencies(const DescriptorModel& m, const std::vector<double>& freqs) {
  if (freqs.empty()) throw InvalidInput("frequency list is empty");
  for (double w : freqs) {
    if (!std::isfinite(w)) throw InvalidInput("frequency list contains NaN or Inf");
    if (m.time_domain == TimeDomain::Discrete && !(w > -std::numbers::pi && w <= std::numbers::pi))
      throw InvalidInput("discrete-time frequency " + std::to_string(w) + " outside (-pi, pi]");
  }
  std::vector<double> sorted = freqs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("frequency list contains duplicates");
}

}  // namespace lftident

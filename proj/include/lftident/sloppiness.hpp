#pragma once

#include <cstdint>
#include <vector>

#include "lftident/identifiability.hpp"

namespace lftident {

/// Pointwise SVD factors at one frequency, G_yv = U_yv1 S_yv V_yv1^H and
/// G_zu = U_zu S_zu V_zu1^H, with
///   Phi_l = L0 V_yv1 S_yv^{-1},   Phi_r = S_zu^{-1} U_zu^H R0.
/// A small response error U_yv1 Dbar V_zu1^H corresponds to
///   Delta P ~= Phi_l Dbar Phi_r + Pi A.
struct PointwiseFactors {
  double omega = 0.0;
  Index r_yv = 0;
  CMat U_yv1, V_yv1;
  Vec s_yv;
  CMat U_zu, V_zu1;
  Vec s_zu;
  CMat L0, R0, Phi_l, Phi_r;
  PiDecomposition pi;
};

/// Throws RankDrop when G_zu is not of full row rank at omega.
PointwiseFactors pointwise_factors(const DescriptorModel& model, const Vec& theta0, double omega,
                                   const RankTolerance& tol = {});

/// Re-expresses the factors in rotated singular bases U_yv1 W_yv, V_zu1 W_zu
/// (W_yv, W_zu unitary). Every downstream quantity must be invariant.
PointwiseFactors rotated(const PointwiseFactors& f, const CMat& W_yv, const CMat& W_zu);

/// Real matrices with
///   vec Re(Phi_l Dbar Phi_r) = Q_r xi,  vec Im(Phi_l Dbar Phi_r) = Q_j xi,
/// where xi = vec(col{Re Dbar, Im Dbar}).
struct QPair {
  Mat Q_r, Q_j;
};
/// Verifies the identities on seeded random probes; throws ConstructionError
/// if they fail.
QPair q_pair(const PointwiseFactors& f, std::uint64_t seed = 5);

/// Dbar as the complex r_yv x m_z matrix encoded by xi.
CMat dbar_from_xi(const Vec& xi, Index r_yv, Index m_z);
Vec xi_from_dbar(const CMat& dbar);

struct GammaOmega {
  PsiDecomposition psi;
  std::vector<PointwiseFactors> factors;
  std::vector<QPair> q;
  Mat Gamma, Omega;
  std::vector<Index> a_offsets, xi_offsets;  // per-frequency column offsets
  Index m_z = 0;
};

GammaOmega gamma_omega(const DescriptorModel& model, const Vec& theta0,
                       const std::vector<double>& freqs, const RankTolerance& tol = {});
GammaOmega gamma_omega(const PsiDecomposition& psi, std::vector<PointwiseFactors> factors, Index m_z);

struct SMatrices {
  GammaOmega go;
  Mat S_H, S_A;
  std::vector<Mat> S_k;         // q x n_s, one per frequency
  std::vector<CMat> S_tilde;    // (m_y m_u) x n_s, one per frequency
  Mat M;                        // sum_k Re(S_tilde_k^H S_tilde_k)
  Index n_s = 0;
};

/// Throws GammaRankDeficient unless Psi and Gamma have full column rank.
SMatrices s_matrices(const GammaOmega& go, const RankTolerance& tol = {});

/// First-order set { theta0 + S_k xi : xi^T M xi <= eps^2 }.
struct EllipsoidModel {
  Mat M, S_k;
  double eps = 0.0;
  Index k = 0;
  bool contains(const Vec& xi) const;
  Vec theta_offset(const Vec& xi) const;
  /// Scales a nonzero direction u onto the boundary xi^T M xi = eps^2.
  Vec boundary_point(const Vec& u) const;
};
EllipsoidModel frobenius_ellipsoid(const SMatrices& S, double eps, Index k = 0);

struct SloppinessReport {
  Vec mu;                 // descending, +inf sentinel allowed
  Mat directions;         // q x n, unit columns
  double sm_absolute = 0.0;
  std::vector<double> sm_relative;
  Index n_s = 0;
  Index k = 0;
  std::vector<double> freqs;
};
SloppinessReport metrics(const SMatrices& S, Index k = 0, const RankTolerance& tol = {});

/// Whether every frequency's response error sigma_max(U_yv1 Dbar_k(xi) V_zu1^H)
/// stays within eps.
bool spectral_membership(const SMatrices& S, const Vec& xi, double eps);

/// Full pipeline: validation, Gamma/Omega, S matrices and metrics.
struct SloppinessAnalysis {
  SMatrices S;
  SloppinessReport report;
};
SloppinessAnalysis analyze_sloppiness(const DescriptorModel& model, const Vec& theta0,
                                      const std::vector<double>& freqs, Index k = 0,
                                      const RankTolerance& tol = {});

}  // namespace lftident

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lftident/response.hpp"

namespace lftident {

/// Psi = [vec P_1, ..., vec P_q] and its full SVD.
struct PsiDecomposition {
  Mat Psi;
  Mat U1, U2, V;
  Vec sigma;
  Index rank = 0;
  bool fcr = false;
};
PsiDecomposition psi(const DescriptorModel& model, const RankTolerance& tol = {});

/// Magnitude G_yv would have if it were full rank; the kernel decision uses it
/// as a floor so an identically-zero G_yv is not ranked as full.
double yv_reference_scale(const DescriptorModel& model, const GBlocks& g);

/// Orthonormal basis of ker G_yv(omega).
CMat yv_kernel_basis(const DescriptorModel& model, const GBlocks& g, const RankTolerance& tol = {});

/// Pointwise objects at one frequency: Pi = L0 K with L0 = I - P(theta0) G_zv.
struct PiDecomposition {
  double omega = 0.0;
  CMat L0, K, Pi;
  Index c = 0;            // dim ker G_yv
  Mat Pi_r_bar, Pi_j_bar; // [Pi_r, -Pi_j] and [Pi_j, Pi_r]
  Mat Xi;                 // rows annihilate exactly the real vectors in range(Pi)
  Mat U2_real;            // [U_Pi2r, U_Pi2j]^T
  bool shortcut = false;  // Pi_j_bar has full column rank
  bool side_condition = true;
  double scale = 0.0;     // ||Pi||_2
};

PiDecomposition pi_at(const DescriptorModel& model, const Vec& theta0, double omega,
                      const RankTolerance& tol = {});
/// Same with a caller-supplied kernel basis K (any basis of ker G_yv).
PiDecomposition pi_from_kernel(const DescriptorModel& model, const Vec& theta0, const GBlocks& g,
                               const CMat& K, const RankTolerance& tol = {});

bool single_freq_shortcut(const PiDecomposition& pi);

/// Stacked Upsilon [U_Psi2^T; I (x) Xi(w_1); I (x) U2_real(w_i), i >= 2].
Mat upsilon_matrix(const PsiDecomposition& psi, const std::vector<PiDecomposition>& pis, Index m_z);

enum class IdentStatus { Identifiable, NotIdentifiable, Inconclusive };
const char* to_string(IdentStatus s);

struct IdentifiabilityVerdict {
  IdentStatus status = IdentStatus::Inconclusive;
  std::vector<double> freqs;
  bool psi_fcr = false;
  Index psi_rank = 0;
  std::optional<double> shortcut_frequency;
  bool side_condition_ok = true;
  // Kernel dimension of the running stack: first after U_Psi2^T, then after
  // each frequency block in order.
  std::vector<Index> rank_trace;
  Index residual_dim = 0;
  Mat residual_basis;  // vec(Delta P) coordinates
  std::optional<Vec> residual_direction;  // parameter-space direction
  bool residual_certified = false;
  std::vector<double> certification_freqs;
  std::string reason;
};

struct IdentOptions {
  RankTolerance tol;
  std::uint64_t seed = 11;
  // Probe extra generic frequencies to decide whether a residual kernel is
  // global (NotIdentifiable) or an artefact of the chosen frequencies.
  bool certify = true;
};

/// Recursive null-space test on the given pointwise data; no certification.
IdentifiabilityVerdict upsilon_from(const PsiDecomposition& psi,
                                    const std::vector<PiDecomposition>& pis, Index m_z,
                                    const RankTolerance& tol = {});

IdentifiabilityVerdict upsilon_test(const DescriptorModel& model, const Vec& theta0,
                                    const std::vector<double>& freqs, const IdentOptions& opts = {});

/// Number of generic frequencies that always suffice: 2 m_x + 1.
Index sufficient_count(const DescriptorModel& model);

struct FnrrReport {
  Index normal_row_rank = 0;
  std::vector<double> probe_freqs;
  std::vector<Index> ranks;
  bool full = false;
  bool consistent = true;
};
/// Normal row rank of G_zu estimated at three seeded generic frequencies.
FnrrReport g_zu_normal_row_rank(const DescriptorModel& model, std::uint64_t seed = 3,
                                const RankTolerance& tol = {});
/// Throws FnrrViolation unless G_zu has full normal row rank.
FnrrReport require_fnrr(const DescriptorModel& model, std::uint64_t seed = 3,
                        const RankTolerance& tol = {});

/// Random pole-guarded frequencies in the model's natural range.
std::vector<double> generic_frequencies(const DescriptorModel& model, const Vec& theta0,
                                        std::size_t count, std::uint64_t seed);

void check_theta(const DescriptorModel& model, const Vec& theta0);

}  // namespace lftident

#pragma once

#include <vector>

#include "lftident/model.hpp"

namespace lftident {

/// lambda = j*omega (continuous) or exp(j*omega) (discrete).
Complex lambda_at(TimeDomain td, double omega);

/// The four open-loop blocks D_ab + C_a (lambda E - A_xx)^{-1} B_b.
struct GBlocks {
  double omega = 0.0;
  Complex lambda;
  CMat yu, yv, zu, zv;
  double pencil_sigma_min = 0.0;  // sigma_min(lambda E - A_xx)
};

/// Relative pole guard: lambda is rejected when
/// sigma_min(lambda E - A) <= 1e-8 * max(||A||_2, ||E||_2).
constexpr double kPoleGuard = 1e-8;

bool near_pole(const DescriptorModel& model, double omega);

/// Throws PoleProximity if omega is numerically on a pole of the open loop.
GBlocks g_blocks(const DescriptorModel& model, double omega);
/// Same at an arbitrary complex point (used by determinant checks).
GBlocks g_blocks_at(const DescriptorModel& model, Complex lambda);

/// H(theta, omega) through the feedback interconnection.
CMat h_lft(const DescriptorModel& model, const Vec& theta, double omega);
CMat h_lft(const DescriptorModel& model, const GBlocks& g, const Vec& theta);
/// H(theta, omega) through the assembled closed-loop realization.
CMat h_statespace(const DescriptorModel& model, const Vec& theta, double omega);

/// Largest relative discrepancy between the four equivalent closed-loop
/// determinant expressions at the given complex probe points.
double regularity_identity_check(const DescriptorModel& model, const Vec& theta,
                                 const std::vector<Complex>& probes);

/// H(theta) - H(theta0) from the factored exact form around theta0.
CMat delta_h(const DescriptorModel& model, const Vec& theta, const Vec& theta0, double omega);

/// dH/dtheta_k at theta0, one matrix per parameter.
std::vector<CMat> h_gradient(const DescriptorModel& model, const Vec& theta0, double omega);

/// Checks that frequencies are finite, distinct and in the admissible range
/// (omega in (-pi, pi] for discrete time). Throws InvalidInput otherwise.
void check_frequencies(const DescriptorModel& model, const std::vector<double>& freqs);

}  // namespace lftident

#pragma once

// Independent reference computations that share no code path with the
// structural tests: finite differences, direct response evaluation and random
// search. Used to cross-check the identifiability and sloppiness results.

#include <cstdint>
#include <optional>
#include <vector>

#include "lftident/sloppiness.hpp"

namespace lftident {

/// Rows: for each frequency, vec Re H then vec Im H. Columns: parameters.
struct JacobianEstimate {
  Mat J;
  double h = 0.0;
  // Max relative change between step h and h/2; small means the estimate is
  // in the truncation-dominated regime.
  double halving_rel_change = 0.0;
};
JacobianEstimate fd_jacobian(const DescriptorModel& model, const Vec& theta0,
                             const std::vector<double>& freqs, std::optional<double> h = {});

/// Same layout from the closed-form derivative G_yv L0^{-1} P_k R0^{-1} G_zu.
Mat analytic_jacobian(const DescriptorModel& model, const Vec& theta0, const std::vector<double>& freqs);

/// Real stacked response [vec Re H(w_1); vec Im H(w_1); ...].
Vec stacked_response(const DescriptorModel& model, const Vec& theta, const std::vector<double>& freqs);

/// Full column rank with threshold rel_tol * sigma_max.
bool local_identifiability(const Mat& J, double rel_tol = 1e-6);

/// 1 / sigma_i^2 of J, descending (so ascending sigma). Throws
/// InfiniteSloppiness when J is rank deficient.
Vec jacobian_sloppiness(const Mat& J, double rel_tol = 1e-6);

struct EquivalenceProbe {
  std::optional<Vec> theta_star;
  double max_response_diff = 0.0;  // for theta_star, or the best candidate
  int candidates_tried = 0;
};
/// Looks for an admissible theta* != theta0 with an indistinguishable
/// response at freqs: seeded random draws from the domain plus line searches
/// along ker Psi and the numerical kernel of the Jacobian.
EquivalenceProbe random_equivalence_probe(const DescriptorModel& model, const Vec& theta0,
                                          const std::vector<double>& freqs, int trials,
                                          std::uint64_t seed, double match_tol = 1e-10,
                                          const std::vector<Vec>& extra_directions = {});

struct EllipsoidStats {
  double eps = 0.0;
  double min_ratio = 0.0, mean_ratio = 0.0, max_ratio = 0.0;
  int samples = 0;
};
/// Samples the boundary of the first-order ellipsoid and reports
/// sum_i ||H(theta) - H(theta0)||_F^2 / eps^2.
std::vector<EllipsoidStats> ellipsoid_empirical_check(const DescriptorModel& model, const Vec& theta0,
                                                      const std::vector<double>& freqs,
                                                      const std::vector<double>& eps_list, int samples,
                                                      std::uint64_t seed, Index k = 0,
                                                      const RankTolerance& tol = {});

}  // namespace lftident

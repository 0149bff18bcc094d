#include "lftident/freqplan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lftident/errors.hpp"

namespace lftident {

std::vector<double> default_grid(const DescriptorModel& m, const GridSpec& spec) {
  if (spec.points == 0) throw EmptyGrid("grid has zero points");
  std::vector<double> raw;
  const double n = static_cast<double>(spec.points);
  if (m.time_domain == TimeDomain::Continuous) {
    const double lo = spec.omega_min.value_or(1e-2), hi = spec.omega_max.value_or(1e2);
    if (!(lo > 0 && hi >= lo && std::isfinite(hi)))
      throw InvalidInput("continuous grid needs 0 < omega_min <= omega_max < inf");
    const double a = std::log10(lo), b = std::log10(hi);
    for (std::size_t i = 0; i < spec.points; ++i)
      raw.push_back(spec.points == 1 ? lo : std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1)));
  } else {
    const double lo = std::max(spec.omega_min.value_or(0.0), 0.0);
    const double hi = std::min(spec.omega_max.value_or(std::numbers::pi), std::numbers::pi);
    if (!(hi > lo)) throw InvalidInput("discrete grid needs omega_min < omega_max within (0, pi]");
    for (std::size_t i = 1; i <= spec.points; ++i)
      raw.push_back(i == spec.points ? hi : lo + (hi - lo) * static_cast<double>(i) / n);
  }
  std::vector<double> out;
  for (double w : raw)
    if (!near_pole(m, w) && (out.empty() || w != out.back())) out.push_back(w);
  if (out.empty()) throw EmptyGrid("every grid point lies on a pole");
  return out;
}

GridSpec refined(const DescriptorModel& m, const GridSpec& spec) {
  GridSpec next = spec;
  next.points = spec.points * 4;
  if (m.time_domain == TimeDomain::Continuous) {
    next.omega_min = spec.omega_min.value_or(1e-2) / 10.0;
    next.omega_max = spec.omega_max.value_or(1e2) * 10.0;
  }
  return next;
}

const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Certified: return "Certified";
    case PlanStatus::NoProgressOnGrid: return "NoProgressOnGrid";
    case PlanStatus::NotIdentifiable: return "NotIdentifiable";
  }
  return "?";
}

FrequencyPlan search_frequencies(const DescriptorModel& m, const Vec& theta0,
                                 const std::vector<double>& grid_in, const SearchOptions& opts) {
  validate_shapes(m);
  check_theta(m, theta0);
  FrequencyPlan plan;
  const PsiDecomposition ps = psi(m, opts.tol);
  if (!ps.fcr) {
    plan.status = PlanStatus::NotIdentifiable;
    plan.rank_trace = {ps.rank};
    plan.residual_dim = m.dims.q - ps.rank;
    plan.hint = "Psi is not of full column rank; no choice of frequencies helps";
    return plan;
  }
  require_fnrr(m, opts.seed, opts.tol);

  std::vector<double> grid = grid_in;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<PiDecomposition> pis;
  std::vector<double> kept;
  for (double w : grid) {
    if (!std::isfinite(w) || near_pole(m, w)) continue;
    try {
      pis.push_back(pi_at(m, theta0, w, opts.tol));
      kept.push_back(w);
    } catch (const PoleProximity&) {
    }
  }
  if (kept.empty()) throw EmptyGrid("no usable frequency on the candidate grid");
  plan.grid_size = kept.size();
  plan.grid_min = kept.front();
  plan.grid_max = kept.back();

  const Mat Iz = Mat::Identity(m.dims.m_z, m.dims.m_z);
  const RankTolerance unit = opts.tol.with_floor(std::max(opts.tol.scale_floor, 1.0));
  plan.rank_trace.push_back(ps.U1.cols());

  // Smallest frequency at which one frequency already suffices.
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (pis[i].shortcut) {
      plan.selected = {kept[i]};
      plan.rank_trace.push_back(0);
      break;
    }
  }

  std::vector<bool> used(kept.size(), false);
  Mat Z = ps.U1;
  if (plan.selected.empty()) {
    // First frequency: the realness constraint through Xi.
    Index best = -1, best_rank = -1;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const Index r = rank_decision<double>(kron<double>(Iz, pis[i].Xi) * Z, unit).rank;
      if (r > best_rank) best_rank = r, best = static_cast<Index>(i);
    }
    const std::size_t b = static_cast<std::size_t>(best);
    Z = Z * right_null_basis<double>(kron<double>(Iz, pis[b].Xi) * Z, unit);
    used[b] = true;
    plan.selected.push_back(kept[b]);
    plan.rank_trace.push_back(Z.cols());
    while (Z.cols() > 0) {
      Index gain_best = 0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < kept.size(); ++i) {
        if (used[i]) continue;
        const Index r = rank_decision<double>(kron<double>(Iz, pis[i].U2_real) * Z, unit).rank;
        if (r > gain_best) gain_best = r, arg = i;
      }
      if (gain_best == 0) break;
      Z = Z * right_null_basis<double>(kron<double>(Iz, pis[arg].U2_real) * Z, unit);
      used[arg] = true;
      plan.selected.push_back(kept[arg]);
      plan.rank_trace.push_back(Z.cols());
    }
  }
  plan.residual_dim = plan.rank_trace.back();
  if (plan.residual_dim > 0) {
    plan.status = PlanStatus::NoProgressOnGrid;
    plan.hint = "no grid frequency reduces the remaining " + std::to_string(plan.residual_dim) +
                "-dimensional kernel; refine or widen the grid, or check global identifiability "
                "with the ident subcommand";
    return plan;
  }
  IdentOptions io;
  io.tol = opts.tol;
  io.seed = opts.seed;
  io.certify = false;
  plan.verification = upsilon_test(m, theta0, plan.selected, io);
  if (plan.verification->status != IdentStatus::Identifiable)
    throw NumericalInconsistency("selected frequencies fail re-verification by the Upsilon test");
  plan.status = PlanStatus::Certified;
  return plan;
}

FrequencyPlan search_frequencies(const DescriptorModel& m, const Vec& theta0, const GridSpec& spec,
                                 const SearchOptions& opts) {
  GridSpec current = spec;
  FrequencyPlan plan;
  for (int round = 0;; ++round) {
    plan = search_frequencies(m, theta0, default_grid(m, current), opts);
    plan.refinement_rounds_used = round;
    if (plan.status != PlanStatus::NoProgressOnGrid || round >= opts.refine_rounds) break;
    current = refined(m, current);
  }
  return plan;
}

}  // namespace lftident

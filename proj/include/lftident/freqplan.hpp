#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lftident/identifiability.hpp"

namespace lftident {

/// Candidate grid. Continuous time: log-spaced on [omega_min, omega_max].
/// Discrete time: uniform on (omega_min, omega_max] clipped to (0, pi]; the
/// defaults there are (0, pi].
struct GridSpec {
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  std::size_t points = 200;
};

/// Pole-guarded grid; throws EmptyGrid if every point is rejected.
std::vector<double> default_grid(const DescriptorModel& model, const GridSpec& spec = {});

/// The next, denser and wider, grid used by refinement rounds.
GridSpec refined(const DescriptorModel& model, const GridSpec& spec);

enum class PlanStatus { Certified, NoProgressOnGrid, NotIdentifiable };
const char* to_string(PlanStatus s);

struct FrequencyPlan {
  PlanStatus status = PlanStatus::NoProgressOnGrid;
  std::vector<double> selected;  // in selection order; selected[0] carries Xi
  // Kernel dimension: after U_Psi2^T, then after each selected frequency.
  std::vector<Index> rank_trace;
  std::size_t grid_size = 0;
  double grid_min = 0.0, grid_max = 0.0;
  int refinement_rounds_used = 0;
  Index residual_dim = 0;
  std::string hint;
  std::optional<IdentifiabilityVerdict> verification;
};

struct SearchOptions {
  RankTolerance tol;
  std::uint64_t seed = 11;
  int refine_rounds = 0;
};

/// Greedy rank-increasing selection over an explicit candidate grid.
FrequencyPlan search_frequencies(const DescriptorModel& model, const Vec& theta0,
                                 const std::vector<double>& grid, const SearchOptions& opts = {});
/// Same over generated grids, refining up to opts.refine_rounds times when the
/// search stalls.
FrequencyPlan search_frequencies(const DescriptorModel& model, const Vec& theta0,
                                 const GridSpec& spec, const SearchOptions& opts = {});

}  // namespace lftident

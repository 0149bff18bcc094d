#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lftident/numkit.hpp"

namespace lftident {

enum class TimeDomain { Continuous, Discrete };

struct Dims {
  Index m_x = 0, m_u = 0, m_y = 0, m_z = 0, m_v = 0, q = 0;
  bool operator==(const Dims&) const = default;
};

/// Admissible parameter set. Only a Euclidean ball around the origin is
/// supported by the file format.
struct ParameterDomain {
  double radius = 1.0;
  bool contains(const Vec& theta) const;
};

/// E dx = A(theta) x + B(theta) u,  y = C(theta) x + D(theta) u, with the
/// parameters entering through the feedback v = P(theta) z,
/// P(theta) = sum_k theta_k P_k.
struct DescriptorModel {
  TimeDomain time_domain = TimeDomain::Continuous;
  Dims dims;
  Mat E, A_xx, B_xu, B_xv, C_yx, C_zx, D_yu, D_yv, D_zu, D_zv;
  std::vector<Mat> P;  // each m_v x m_z
  ParameterDomain domain;

  Mat p_of(const Vec& theta) const;
};

/// Closed-loop matrices A(theta), B(theta), C(theta), D(theta).
struct ClosedLoop {
  Mat A, B, C, D;
};
ClosedLoop assemble(const DescriptorModel& model, const Vec& theta);

/// Throws ModelShapeError on any dimension mismatch and ModelNonFiniteError on
/// NaN/Inf entries.
void validate_shapes(const DescriptorModel& model);

DescriptorModel parse_model(const std::string& json_text);
DescriptorModel load_model(const std::string& path);
/// Canonical JSON text; parse_model(save_model(m)) reproduces m exactly and
/// save_model is a fixed point of the round trip.
std::string save_model(const DescriptorModel& model);

struct AssumptionSample {
  Vec theta;
  double well_posedness_cond = 0.0;  // cond(I - P(theta) D_zv)
  double min_regularity_ratio = 0.0; // min over probes of |det| / Hadamard bound
  std::vector<double> det_magnitudes;
};

struct AssumptionReport {
  std::vector<AssumptionSample> samples;
  double worst_cond = 0.0;
  double worst_regularity_ratio = 0.0;
};

/// Checks well-posedness (I - P D_zv invertible) and regularity of the pencil
/// (lambda E - A(theta)) at each sample. Throws WellPosednessViolation or
/// RegularityViolation naming the offending sample.
AssumptionReport validate_assumptions(const DescriptorModel& model, const std::vector<Vec>& thetas,
                                      std::uint64_t seed = 7);

/// Transposed system (u and y swap roles, as do z and v). An involution.
DescriptorModel dualize(const DescriptorModel& model);

}  // namespace lftident

#pragma once

#include <cstdint>
#include <string>

#include "lftident/model.hpp"

namespace lftident::test {

std::string data_path(const std::string& name);

// x' = -x + (1 + theta) ... i.e. H = 1 / (lambda + 1 - theta), all G-blocks
// equal to 1 / (lambda + 1).
DescriptorModel siso1();
// siso1 with two identical parameter directions.
DescriptorModel dup2();
// Two decoupled first-order channels with input gains g1 and g2.
DescriptorModel two_channel(double g1, double g2);
// Parameters enter only through a channel that cannot reach the output.
DescriptorModel hidden_parameter();
// A_xx has eigenvalues +-j.
DescriptorModel oscillator();

struct RandomSpec {
  Index m_x = 2, m_u = 2, m_y = 1, m_z = 1, m_v = 2, q = 2;
  bool discrete = false;
  bool descriptor = false;   // E != I
  bool feedthrough = true;   // nonzero D_zv
};

DescriptorModel random_model(std::uint64_t seed, const RandomSpec& spec);
// Random spec with dimensions drawn from small ranges.
RandomSpec random_spec(std::uint64_t seed);
Vec random_theta(const DescriptorModel& m, std::uint64_t seed, double fraction = 0.3);
Mat random_matrix(std::uint64_t seed, Index rows, Index cols);
CMat random_unitary(std::uint64_t seed, Index n);

}  // namespace lftident::test

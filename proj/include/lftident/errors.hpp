#pragma once

#include <stdexcept>
#include <string>

namespace lftident {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: shapes, empty lists, duplicates, parameters outside the domain.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Model file problems. Each maps to CLI exit code 2.
class ModelParseError : public Error {
 public:
  using Error::Error;
};
class ModelShapeError : public Error {
 public:
  using Error::Error;
};
class ModelNonFiniteError : public Error {
 public:
  using Error::Error;
};

// Violations of the standing modelling assumptions. CLI exit code 3.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};
class WellPosednessViolation : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
class RegularityViolation : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
class FnrrViolation : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
// Evaluation frequency sits on (or numerically next to) a pole.
class PoleProximity : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
// G_zu loses row rank at a requested frequency.
class RankDrop : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
// Gamma (or Psi) not of full column rank: sloppiness is undefined here.
class GammaRankDeficient : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};
// Rank-deficient Jacobian handed to the Jacobian-based sloppiness oracle.
class InfiniteSloppiness : public AssumptionViolation {
 public:
  using AssumptionViolation::AssumptionViolation;
};

// Internal inconsistencies. CLI exit code 4.
class NumericalInconsistency : public Error {
 public:
  using Error::Error;
};
class ConstructionError : public NumericalInconsistency {
 public:
  using NumericalInconsistency::NumericalInconsistency;
};

class EmptyGrid : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

}  // namespace lftident

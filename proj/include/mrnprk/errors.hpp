#pragma once

#include <stdexcept>
#include <string>

namespace mrnprk {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A tensor whose irreducible stage sets do not cover all stages (Assumption 3.6).
struct AssumptionViolation : Error { using Error::Error; };

// Explicit base method fails the classical order prerequisite of a constructor.
struct OrderPrerequisite : Error { using Error::Error; };

// A closed-form coupling coefficient has a vanishing denominator.
struct DegenerateCoefficient : Error { using Error::Error; };

// Stage tensor fed to a stepper is not diagonally implicit in the IMEX sense.
struct NonImexTensor : Error { using Error::Error; };

struct NewtonDivergence : Error { using Error::Error; };

struct SingularDenominator : Error { using Error::Error; };

// Ray-fitted polynomial degree is not within tolerance of an integer.
struct DegreeMismatch : Error { using Error::Error; };

struct SolveFailure : Error { using Error::Error; };

struct UsageError : Error { using Error::Error; };

}  // namespace mrnprk

#pragma once

#include <stdexcept>
#include <string>

namespace phetc {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PHETC_DEFINE_ERROR(Name)      \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

// ph-core
PHETC_DEFINE_ERROR(AntisymmetryViolation);
PHETC_DEFINE_ERROR(DissipationViolation);
PHETC_DEFINE_ERROR(EquilibriumViolation);
PHETC_DEFINE_ERROR(GradientMismatch);
PHETC_DEFINE_ERROR(DimensionMismatch);

// sim-engine
PHETC_DEFINE_ERROR(StepMismatch);
PHETC_DEFINE_ERROR(NonFiniteState);

// lk-analysis
PHETC_DEFINE_ERROR(InsufficientHistory);

// lmi-certifier
PHETC_DEFINE_ERROR(NonConstantMatrices);
PHETC_DEFINE_ERROR(NoFeasiblePoint);

// bench-cli
PHETC_DEFINE_ERROR(ConfigError);

#undef PHETC_DEFINE_ERROR

}  // namespace phetc

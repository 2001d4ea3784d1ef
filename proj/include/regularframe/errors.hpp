#pragma once

#include <stdexcept>
#include <string>

namespace regularframe {

/// Base of every error raised by the library. `kind()` is the stable name
/// used in reports and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define REGULARFRAME_ERROR(Name)                                             \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(#Name, what) {}           \
  }

// configuration / input
REGULARFRAME_ERROR(ConfigError);
REGULARFRAME_ERROR(SchemaError);

// lorentz_algebra
REGULARFRAME_ERROR(EvaluationError);
REGULARFRAME_ERROR(SingularMetricError);
REGULARFRAME_ERROR(NotGloballyHyperbolicHereError);
REGULARFRAME_ERROR(SignatureError);

// regular_chart
REGULARFRAME_ERROR(DomainExitError);
REGULARFRAME_ERROR(BlowupError);
REGULARFRAME_ERROR(NoRegularNeighborhoodError);
REGULARFRAME_ERROR(OutOfCubeError);
REGULARFRAME_ERROR(CoverFailureError);

// metric_interpolation
REGULARFRAME_ERROR(DegenerateFrameError);
REGULARFRAME_ERROR(InterpolationSignatureError);

// kg_dynamics / mass_shell
REGULARFRAME_ERROR(StabilityError);
REGULARFRAME_ERROR(SliceError);
REGULARFRAME_ERROR(LatticeError);
REGULARFRAME_ERROR(QuadratureError);

// fock_qft
REGULARFRAME_ERROR(ParticleSystemError);
REGULARFRAME_ERROR(UnitarityError);
REGULARFRAME_ERROR(VacuumError);
REGULARFRAME_ERROR(RegistryError);

#undef REGULARFRAME_ERROR

}  // namespace regularframe

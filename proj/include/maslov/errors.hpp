#pragma once

#include <stdexcept>
#include <string>

namespace maslov {

// Every failure raised by the library derives from Error; the kind string
// is stable and is what the CLI and reports print.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define MASLOV_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& what) : Error(#Name, what) {}             \
  }

// lattice_geometry
MASLOV_DEFINE_ERROR(SingularBasis);
// potential_model
MASLOV_DEFINE_ERROR(OutOfCell);
MASLOV_DEFINE_ERROR(NoGradient);
MASLOV_DEFINE_ERROR(InvalidPotential);
// spectral_engine
MASLOV_DEFINE_ERROR(AliasingRisk);
MASLOV_DEFINE_ERROR(UnsupportedLattice);
MASLOV_DEFINE_ERROR(ConvergenceFailure);
MASLOV_DEFINE_ERROR(BoundaryAmbiguity);
MASLOV_DEFINE_ERROR(MatchFailure);
// symplectic_core
MASLOV_DEFINE_ERROR(NotLagrangian);
MASLOV_DEFINE_ERROR(DimensionMismatch);
MASLOV_DEFINE_ERROR(NoGapFound);
MASLOV_DEFINE_ERROR(NonRegular);
MASLOV_DEFINE_ERROR(GraphBreakdown);
MASLOV_DEFINE_ERROR(NotACrossing);
// shooting_1d
MASLOV_DEFINE_ERROR(StepTooCoarse);
MASLOV_DEFINE_ERROR(BCMismatch);
// index_verifier
MASLOV_DEFINE_ERROR(SumViolation);
MASLOV_DEFINE_ERROR(HypothesisViolation);
MASLOV_DEFINE_ERROR(UnresolvedCrossing);
MASLOV_DEFINE_ERROR(NonRegularCrossing);
MASLOV_DEFINE_ERROR(ConfigError);

#undef MASLOV_DEFINE_ERROR

}  // namespace maslov

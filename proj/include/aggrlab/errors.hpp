#pragma once

#include <stdexcept>
#include <string>

namespace aggrlab {

// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define AGGRLAB_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& msg = #Name) : Error(msg) {} \
  }

// model_core
AGGRLAB_DEFINE_ERROR(DimensionMismatch);
AGGRLAB_DEFINE_ERROR(NotADistribution);
AGGRLAB_DEFINE_ERROR(SupportTooLarge);
AGGRLAB_DEFINE_ERROR(ZeroProbabilitySignal);
AGGRLAB_DEFINE_ERROR(DegeneratePrior);
AGGRLAB_DEFINE_ERROR(ContradictoryReports);

// metrics
AGGRLAB_DEFINE_ERROR(SupportMismatch);
AGGRLAB_DEFINE_ERROR(EmptySample);

// aggregators
AGGRLAB_DEFINE_ERROR(UnseenProfile);
AGGRLAB_DEFINE_ERROR(AllZeroLikelihood);
AGGRLAB_DEFINE_ERROR(InvalidGrid);
AGGRLAB_DEFINE_ERROR(MissingOutcomeClass);
AGGRLAB_DEFINE_ERROR(ZeroDenominator);
AGGRLAB_DEFINE_ERROR(InsufficientSamples);
AGGRLAB_DEFINE_ERROR(PreconditionViolated);
AGGRLAB_DEFINE_ERROR(NoQualifyingIndex);
AGGRLAB_DEFINE_ERROR(InsufficientGroups);

// hard_instances
AGGRLAB_DEFINE_ERROR(OddSignalSpace);
AGGRLAB_DEFINE_ERROR(SignVectorMismatch);
AGGRLAB_DEFINE_ERROR(EpsilonTooLarge);
AGGRLAB_DEFINE_ERROR(InvalidDistinguisher);

// harness
AGGRLAB_DEFINE_ERROR(UnknownBattery);
AGGRLAB_DEFINE_ERROR(InvalidConfig);

#undef AGGRLAB_DEFINE_ERROR

}  // namespace aggrlab

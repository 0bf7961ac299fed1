#pragma once

#include <stdexcept>
#include <string>

namespace dentalreg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define DENTALREG_DEFINE_ERROR(Name)         \
  struct Name : Error {                      \
    using Error::Error;                      \
  }

DENTALREG_DEFINE_ERROR(ParseError);
DENTALREG_DEFINE_ERROR(EmptyMesh);
DENTALREG_DEFINE_ERROR(TooFewPairs);
DENTALREG_DEFINE_ERROR(Degenerate);
DENTALREG_DEFINE_ERROR(DimensionMismatch);
DENTALREG_DEFINE_ERROR(UnusableCase);
DENTALREG_DEFINE_ERROR(InvalidConfig);
DENTALREG_DEFINE_ERROR(NonpositiveBandwidth);
DENTALREG_DEFINE_ERROR(UnfittedModel);
DENTALREG_DEFINE_ERROR(EmptyPopulation);
DENTALREG_DEFINE_ERROR(NonpositiveLR);
DENTALREG_DEFINE_ERROR(EmptyInput);
DENTALREG_DEFINE_ERROR(MissingScores);
DENTALREG_DEFINE_ERROR(PositionOutOfRange);
DENTALREG_DEFINE_ERROR(ManifestError);
DENTALREG_DEFINE_ERROR(MissingParams);
DENTALREG_DEFINE_ERROR(InFrameExhausted);
DENTALREG_DEFINE_ERROR(IoError);

#undef DENTALREG_DEFINE_ERROR

/// Fitness callback failure, carries the candidate that was being evaluated.
struct FitnessEvaluationError : Error {
  FitnessEvaluationError(const std::string& what, std::string point_repr)
      : Error(what + " at point " + point_repr), point(std::move(point_repr)) {}
  std::string point;
};

}  // namespace dentalreg

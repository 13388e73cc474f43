#pragma once

#include <stdexcept>
#include <string>

namespace nlspec {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define NLSPEC_DEFINE_ERROR(Name)                                             \
  class Name : public Error {                                                 \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}      \
  }

NLSPEC_DEFINE_ERROR(DimensionMismatch);
NLSPEC_DEFINE_ERROR(NonFiniteValue);
NLSPEC_DEFINE_ERROR(InvalidGraph);
NLSPEC_DEFINE_ERROR(BadParams);
NLSPEC_DEFINE_ERROR(NullspaceElement);
NLSPEC_DEFINE_ERROR(UnsupportedFunctional);
NLSPEC_DEFINE_ERROR(ZeroSignal);
NLSPEC_DEFINE_ERROR(BadStep);
NLSPEC_DEFINE_ERROR(DimensionTooLarge);
NLSPEC_DEFINE_ERROR(NotSymmetric);
NLSPEC_DEFINE_ERROR(EmptyBoundary);
NLSPEC_DEFINE_ERROR(NullspaceStart);
NLSPEC_DEFINE_ERROR(DegenerateEnergy);
NLSPEC_DEFINE_ERROR(ConfigError);
NLSPEC_DEFINE_ERROR(SchemaMismatch);

#undef NLSPEC_DEFINE_ERROR

}  // namespace nlspec

#pragma once

#include <stdexcept>
#include <string>

namespace magtunnel {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define MAGTUNNEL_ERROR(Name)                                                  \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string &what) : Error(#Name ": " + what) {}       \
  }

MAGTUNNEL_ERROR(DomainError);
MAGTUNNEL_ERROR(NonConvergence);
MAGTUNNEL_ERROR(GridTooCoarse);
MAGTUNNEL_ERROR(QuadratureFailure);
MAGTUNNEL_ERROR(SingularIntegrand);
MAGTUNNEL_ERROR(MatchFailure);
MAGTUNNEL_ERROR(InternalInconsistency);
MAGTUNNEL_ERROR(TruncationError);
MAGTUNNEL_ERROR(UnresolvableGap);
MAGTUNNEL_ERROR(ParseError);
MAGTUNNEL_ERROR(InvariantViolation);

#undef MAGTUNNEL_ERROR

} // namespace magtunnel

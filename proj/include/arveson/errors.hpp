#pragma once

#include <stdexcept>
#include <string>

namespace arveson {

/// Base class of every error raised by the library.
/// what() reads "Kind: detail"; kind() returns the bare class name.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& detail)
      : std::runtime_error(std::string(kind) + ": " + detail), kind_(kind) {}
  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define ARVESON_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& detail) : Error(#Name, detail) {} \
  }

// linalg
ARVESON_DEFINE_ERROR(InvalidArgument);
ARVESON_DEFINE_ERROR(DimensionError);
ARVESON_DEFINE_ERROR(NotHermitian);

// cp-maps
ARVESON_DEFINE_ERROR(NotCompletelyPositive);
ARVESON_DEFINE_ERROR(NoFixedPoint);
ARVESON_DEFINE_ERROR(DecompositionFailure);
ARVESON_DEFINE_ERROR(PeripheralDefect);
ARVESON_DEFINE_ERROR(NotInRange);
ARVESON_DEFINE_ERROR(Infeasible);

// similarity
ARVESON_DEFINE_ERROR(NoIntertwiner);
ARVESON_DEFINE_ERROR(NotUnitarilySimilar);
ARVESON_DEFINE_ERROR(NotUCP);
ARVESON_DEFINE_ERROR(NotConjugation);
ARVESON_DEFINE_ERROR(CapacityError);

// io
ARVESON_DEFINE_ERROR(ParseError);
ARVESON_DEFINE_ERROR(SchemaError);

#undef ARVESON_DEFINE_ERROR

}  // namespace arveson

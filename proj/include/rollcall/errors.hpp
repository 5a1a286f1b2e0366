#pragma once

#include <stdexcept>
#include <string>

namespace rollcall {

// Error taxonomy. Exit-code mapping lives in the CLI:
// usage/argument errors -> 1, data errors -> 2, numerical failures -> 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};
struct IntegrityError : Error {
  using Error::Error;
};
struct InvalidArgument : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct EmptyModelError : Error {
  using Error::Error;
};
struct EmptyDocumentError : Error {
  using Error::Error;
};
struct UnlabeledBillError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct DegenerateError : Error {
  using Error::Error;
};
struct IdentificationError : Error {
  using Error::Error;
};

}  // namespace rollcall

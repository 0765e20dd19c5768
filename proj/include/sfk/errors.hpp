#pragma once

#include <stdexcept>
#include <string>

namespace sfk {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvalidValue : Error {
  using Error::Error;
};

struct NonPositiveDepth : Error {
  using Error::Error;
};

struct NoValidPixels : Error {
  using Error::Error;
};

struct UnknownClassId : Error {
  using Error::Error;
};

struct DecodeError : Error {
  using Error::Error;
};

struct WrongBitDepth : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct NonOrthonormalRotation : Error {
  using Error::Error;
};

struct SpecError : Error {
  using Error::Error;
};

}  // namespace sfk

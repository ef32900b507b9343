#pragma once

#include <stdexcept>
#include <string>

namespace samark {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidChannelCount : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct ZeroVector : Error {
  using Error::Error;
};
struct EmptyPool : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct BackendError : Error {
  using Error::Error;
};
struct RemoteError : BackendError {
  using BackendError::BackendError;
};
struct Timeout : RemoteError {
  using RemoteError::RemoteError;
};
struct TooFewSamples : Error {
  using Error::Error;
};
struct ZeroVariance : Error {
  using Error::Error;
};
struct InvalidRate : Error {
  using Error::Error;
};
struct EmptyNull : Error {
  using Error::Error;
};
struct EmptyList : Error {
  using Error::Error;
};
struct EmptyLexicon : Error {
  using Error::Error;
};

}  // namespace samark

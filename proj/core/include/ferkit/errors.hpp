#pragma once

#include <stdexcept>
#include <string>

namespace ferkit {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};

struct EmptyInput : Error {
  EmptyInput() : Error("empty input") {}
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

struct MissingPlaceholder : Error {
  using Error::Error;
};

struct LabelNotInCandidates : Error {
  using Error::Error;
};

// Remote-endpoint failures. AuthError is never retried; ExhaustedRetries
// means the retry budget was spent on retryable failures.
struct ClientError : Error {
  using Error::Error;
};
struct AuthError : ClientError {
  using ClientError::ClientError;
};
struct ExhaustedRetries : ClientError {
  using ClientError::ClientError;
};
struct MalformedResponse : ClientError {
  using ClientError::ClientError;
};

struct InsufficientVariants : Error {
  using Error::Error;
};

struct GroupTooSmall : Error {
  using Error::Error;
};
struct TokenOutOfVocab : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};

struct NoResults : Error {
  using Error::Error;
};

}  // namespace ferkit

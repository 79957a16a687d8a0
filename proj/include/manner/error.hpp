#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace manner {

enum class ErrorKind {
  // gridworld
  OutOfBounds,
  Blocked,
  IllegalInteraction,
  AlloSymbolPresent,
  NoReferent,
  AmbiguousReferent,
  ExhaustedRetries,
  // adverb-dsl
  DepthExceeded,
  ParseError,
  DuplicateLhs,
  InvalidProgram,
  // meta-grammar
  Unclassifiable,
  RejectBudgetExceeded,
  // oracle / forge
  UnknownAdverb,
  RetryExhausted,
  InsufficientExamples,
  SchemaMismatch,
  DigestMismatch,
  MalformedRecord,
  // harness
  MissingPrediction,
  DuplicatePrediction,
  UnknownIndex,
  // general
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI,
/// the Python module) can categorize it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// A malformed-text error with a 1-based source location.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t line, std::size_t column, const std::string& message)
      : Error(kind, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                        message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace manner

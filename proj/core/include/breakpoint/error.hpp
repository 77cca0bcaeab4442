#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace breakpoint {

enum class Errc {
  PathNotFound,
  NoUnitsFound,
  ParseError,
  UnknownNode,
  NonConvergence,
  TooFewRecords,
  BaselineFailed,
  UnsupportedTarget,
  ClientFailure,
  NoValidCorruption,
  NotEnoughCandidates,
  BudgetExhausted,
  AttemptsExhausted,
  PathOutsideSandbox,
  InvalidPattern,
  InvalidArgument,
  NotFound,
  UnknownUnit,
  UnparseableBody,
  SnapshotFailure,
  SessionClosed,
  WrongMode,
  Separation,
  RankDeficient,
  DegenerateOutcomes,
  ZeroVariance,
  UnknownAgent,
  NoTasksGenerated,
  NoResults,
  StoreLocked,
  SchemaError,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by the Python frontend. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace breakpoint

#include "breakpoint/error.hpp"

namespace breakpoint {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::PathNotFound: return "PathNotFound";
    case Errc::NoUnitsFound: return "NoUnitsFound";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::TooFewRecords: return "TooFewRecords";
    case Errc::BaselineFailed: return "BaselineFailed";
    case Errc::UnsupportedTarget: return "UnsupportedTarget";
    case Errc::ClientFailure: return "ClientFailure";
    case Errc::NoValidCorruption: return "NoValidCorruption";
    case Errc::NotEnoughCandidates: return "NotEnoughCandidates";
    case Errc::BudgetExhausted: return "BudgetExhausted";
    case Errc::AttemptsExhausted: return "AttemptsExhausted";
    case Errc::PathOutsideSandbox: return "PathOutsideSandbox";
    case Errc::InvalidPattern: return "InvalidPattern";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotFound: return "NotFound";
    case Errc::UnknownUnit: return "UnknownUnit";
    case Errc::UnparseableBody: return "UnparseableBody";
    case Errc::SnapshotFailure: return "SnapshotFailure";
    case Errc::SessionClosed: return "SessionClosed";
    case Errc::WrongMode: return "WrongMode";
    case Errc::Separation: return "Separation";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::DegenerateOutcomes: return "DegenerateOutcomes";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::UnknownAgent: return "UnknownAgent";
    case Errc::NoTasksGenerated: return "NoTasksGenerated";
    case Errc::NoResults: return "NoResults";
    case Errc::SchemaError: return "SchemaError";
    case Errc::StoreLocked: return "StoreLocked";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

SyntaxError::SyntaxError(int line, int column, const std::string& message)
    : Error(Errc::ParseError,
            "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace breakpoint

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace llab {

enum class ErrorCode {
  InvalidArgument,
  InvalidSequence,
  InvalidGrid,
  QuadratureNonconverged,
  DivisionDegenerate,
  WindowOverlap,
  PreconditionKTooSmall,
  PreconditionMTooSmall,
  InfeasibleT,
  ClusterViolation,
  RootfindFail,
  BudgetExceeded,
  InvalidPrime,
  CutoffExceeded,
  SigmaTooSmall,
  SigmaBelowTheta,
  PoleProximity,
  ConfigInvalid,
  SchemaMismatch,
  FileNotFound,
  IoError,
};

inline std::string_view error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::InvalidSequence: return "INVALID_SEQUENCE";
    case ErrorCode::InvalidGrid: return "INVALID_GRID";
    case ErrorCode::QuadratureNonconverged: return "QUADRATURE_NONCONVERGED";
    case ErrorCode::DivisionDegenerate: return "DIVISION_DEGENERATE";
    case ErrorCode::WindowOverlap: return "WINDOW_OVERLAP";
    case ErrorCode::PreconditionKTooSmall: return "PRECONDITION_K_TOO_SMALL";
    case ErrorCode::PreconditionMTooSmall: return "PRECONDITION_M_TOO_SMALL";
    case ErrorCode::InfeasibleT: return "INFEASIBLE_T";
    case ErrorCode::ClusterViolation: return "CLUSTER_VIOLATION";
    case ErrorCode::RootfindFail: return "ROOTFIND_FAIL";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::InvalidPrime: return "INVALID_PRIME";
    case ErrorCode::CutoffExceeded: return "CUTOFF_EXCEEDED";
    case ErrorCode::SigmaTooSmall: return "SIGMA_TOO_SMALL";
    case ErrorCode::SigmaBelowTheta: return "SIGMA_BELOW_THETA";
    case ErrorCode::PoleProximity: return "POLE_PROXIMITY";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::FileNotFound: return "FILE_NOT_FOUND";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& detail) {
  if (!ok) throw Error(code, detail);
}

}  // namespace llab

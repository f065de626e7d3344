#pragma once
#include <stdexcept>
#include <string>

namespace dimer {

enum class Err {
  MalformedInput = 1,
  EmptyPatch,
  TooLarge,
  InconsistentChain,
  NoCover,
  NotRegular,
  BoundaryEdge,
  NotGeneralPosition,
  QuadratureFailure,
  OutsidePolygon,
  NotExtendable,
  Infeasible,
  NonConvergence,
  GridMismatch,
  Unreachable,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

private:
  Err code_;
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::MalformedInput: return "MalformedInput";
    case Err::EmptyPatch: return "EmptyPatch";
    case Err::TooLarge: return "TooLarge";
    case Err::InconsistentChain: return "InconsistentChain";
    case Err::NoCover: return "NoCover";
    case Err::NotRegular: return "NotRegular";
    case Err::BoundaryEdge: return "BoundaryEdge";
    case Err::NotGeneralPosition: return "NotGeneralPosition";
    case Err::QuadratureFailure: return "QuadratureFailure";
    case Err::OutsidePolygon: return "OutsidePolygon";
    case Err::NotExtendable: return "NotExtendable";
    case Err::Infeasible: return "Infeasible";
    case Err::NonConvergence: return "NonConvergence";
    case Err::GridMismatch: return "GridMismatch";
    case Err::Unreachable: return "Unreachable";
    case Err::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace dimer

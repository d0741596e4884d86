#include "mreit/errors.hpp"

#include <sstream>

namespace mreit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ElectrodeEmpty: return "ElectrodeEmpty";
    case ErrorKind::NonCoercive: return "NonCoercive";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularCoefficientMatrix: return "SingularCoefficientMatrix";
    case ErrorKind::TraceMismatch: return "TraceMismatch";
    case ErrorKind::IllConditionedReducedSystem: return "IllConditionedReducedSystem";
    case ErrorKind::MeshMismatch: return "MeshMismatch";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

bool Error::numerical() const noexcept {
  switch (kind_) {
    case ErrorKind::NonCoercive:
    case ErrorKind::SingularSystem:
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularCoefficientMatrix:
    case ErrorKind::TraceMismatch:
    case ErrorKind::IllConditionedReducedSystem:
      return true;
    default:
      return false;
  }
}

namespace {

std::string format_no_convergence(int iterations, double residual) {
  std::ostringstream os;
  os << "CG did not converge after " << iterations << " iterations (relative residual "
     << residual << ")";
  return os.str();
}

std::string format_singular(int triangle, double det) {
  std::ostringstream os;
  os << "coefficient matrix not invertible on triangle " << triangle << " (det " << det << ")";
  return os.str();
}

std::string format_ill(double cond) {
  std::ostringstream os;
  os << "reduced system ill-conditioned (condition estimate " << cond << ")";
  return os.str();
}

}  // namespace

NoConvergence::NoConvergence(int iterations, double relative_residual)
    : Error(ErrorKind::NoConvergence, format_no_convergence(iterations, relative_residual)),
      iterations_(iterations),
      residual_(relative_residual) {}

SingularCoefficientMatrix::SingularCoefficientMatrix(int triangle, double det)
    : Error(ErrorKind::SingularCoefficientMatrix, format_singular(triangle, det)),
      triangle_(triangle),
      det_(det) {}

IllConditionedReducedSystem::IllConditionedReducedSystem(double condition)
    : Error(ErrorKind::IllConditionedReducedSystem, format_ill(condition)),
      condition_(condition) {}

}  // namespace mreit

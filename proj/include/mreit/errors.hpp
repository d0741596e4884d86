#pragma once

#include <stdexcept>
#include <string>

namespace mreit {

enum class ErrorKind {
  InvalidArgument,
  ElectrodeEmpty,
  NonCoercive,
  SingularSystem,
  NoConvergence,
  SingularCoefficientMatrix,
  TraceMismatch,
  IllConditionedReducedSystem,
  MeshMismatch,
  Io,
  Parse,
};

const char* to_string(ErrorKind kind);

// Base class for every failure raised by the library. The kind drives the
// CLI exit code table.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // True for failures that originate in the numerics (as opposed to bad
  // input or I/O).
  bool numerical() const noexcept;

 private:
  ErrorKind kind_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double relative_residual);
  int iterations() const noexcept { return iterations_; }
  double relative_residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class SingularCoefficientMatrix : public Error {
 public:
  SingularCoefficientMatrix(int triangle, double det);
  int triangle() const noexcept { return triangle_; }
  double det() const noexcept { return det_; }

 private:
  int triangle_;
  double det_;
};

class IllConditionedReducedSystem : public Error {
 public:
  explicit IllConditionedReducedSystem(double condition);
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace mreit

#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"
#include "mreit/synthetic.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace mreit {

// What to do on an Omega_I triangle whose coefficient matrix fails the
// determinant test.
enum class DetGuard { Error, ZeroOut };

struct BzConfig {
  double epsilon = 1e-6;      // termination on max |ln sigma^n - ln sigma^{n-1}|
  double mu0 = 1.0;
  int max_iterations = 100;   // cap on conductivity updates
  double det_floor = 1e-12;   // |det A_T| >= det_floor * |row1| * |row2|
  DetGuard det_guard = DetGuard::Error;
  double sigma_b = 1.0;       // known background conductivity at the boundary
  SolveOptions solve{};
  int threads = 1;            // >1 solves the two drives concurrently
};

enum class RunStatus { Converged, MaxIterations };
std::string_view status_name(RunStatus status);

struct PhaseTimes {
  double setup_ms = 0.0;
  double assembly_ms = 0.0;
  double full_solve_ms = 0.0;
  double reduced_solve_ms = 0.0;
  double estimator_ms = 0.0;
  double poisson_ms = 0.0;
};

struct ReconstructionResult {
  NodalField sigma;
  NodalField log_sigma;
  std::vector<double> diff_history;  // max nodal |ln sigma^n - ln sigma^{n-1}| per update
  int iterations = 0;                // conductivity updates
  int forward_solves = 0;            // full-order forward solves
  RunStatus status = RunStatus::Converged;
  double wall_ms = 0.0;
  double final_diff = 0.0;
  PhaseTimes phases;
};

// Row j = (du_j/dy, -du_j/dx).
TriMat2 assemble_A(const TriVec2& grad_u1, const TriVec2& grad_u2);

// V_T = (mu0 mean(sigma)_T A_T)^{-1} (lap1_T, lap2_T) on Omega_I, zero elsewhere.
TriVec2 vector_field(const Mesh& mesh, const NodalField& sigma, const TriMat2& A,
                     const LaplacianBzData& data, const RegionMasks& masks, const BzConfig& cfg);

// Weak Poisson problem int grad(w).grad(v) = int V.grad(v) with w = ln sigma_b
// on the whole boundary. The constrained Laplacian is built once.
class LogConductivitySolver {
 public:
  LogConductivitySolver(const Mesh& mesh, double sigma_b, SolveOptions options = {});
  NodalField solve(const TriVec2& V) const;

 private:
  const Mesh* mesh_;
  SparseSystem system_;  // rhs holds the lifted boundary data for V = 0
  std::vector<char> fixed_;
  SolveOptions options_;
};

NodalField update_log_sigma(const Mesh& mesh, const TriVec2& V, const BzConfig& cfg);

// One update of the iteration from given forward solutions: A, V, and the
// Poisson solve for the next log conductivity.
NodalField harmonic_update(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                           const NodalField& sigma, const NodalField& u1, const NodalField& u2,
                           const LogConductivitySolver& poisson, const BzConfig& cfg);

// Harmonic Bz iteration started at sigma_b, stopped when successive log
// iterates differ by less than epsilon in the nodal max norm.
ReconstructionResult reconstruct_bz(const Mesh& mesh, const RegionMasks& masks,
                                    const LaplacianBzData& data, const BzConfig& cfg = {});

// Same, from an explicit initial conductivity.
ReconstructionResult reconstruct_bz(const Mesh& mesh, const RegionMasks& masks,
                                    const LaplacianBzData& data, const NodalField& sigma0,
                                    const BzConfig& cfg);

}  // namespace mreit

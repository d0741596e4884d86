#pragma once

#include "mreit/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <span>
#include <vector>

namespace mreit {

// One value per mesh node, interpreted as a continuous P1 function.
using NodalField = Eigen::VectorXd;
// One value per triangle.
using TriField = Eigen::VectorXd;
using TriVec2 = std::vector<Eigen::Vector2d>;
using TriMat2 = std::vector<Eigen::Matrix2d>;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Constraint {
  int node = 0;
  double value = 0.0;
};

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  // Constraints already eliminated from matrix/rhs. Empty for a raw system.
  std::vector<Constraint> constraints;
};

// Mean of the three vertex values on triangle t. This is the per-element
// coefficient used by every assembly routine.
double vertex_mean(const Mesh& mesh, const NodalField& f, int t);

// Assembles sigma-weighted P1 stiffness matrices on a fixed sparsity pattern.
// The pattern and the per-triangle slot table are built once per mesh; the
// mesh must outlive the assembler.
class StiffnessAssembler {
 public:
  explicit StiffnessAssembler(const Mesh& mesh);

  SparseMatrix assemble(const NodalField& sigma) const;
  const Mesh& mesh() const { return *mesh_; }

 private:
  const Mesh* mesh_;
  SparseMatrix pattern_;
  std::vector<std::array<int, 9>> slots_;
};

// Entry (i,j) = sum_T mean(sigma)_T |T| grad(phi_i).grad(phi_j).
// Throws NonCoercive if any nodal sigma is not strictly positive.
SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& sigma);
// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const Mesh& mesh);
// Gram matrix of the H1 inner product: mass + stiffness(sigma = 1).
SparseMatrix assemble_h1_gram(const Mesh& mesh);

// Symmetric elimination. Constrained rows and columns become unit rows, the
// rhs is corrected for the eliminated columns. Repeated nodes must agree.
SparseSystem apply_dirichlet(SparseSystem system, std::span<const Constraint> constraints);

struct SolveOptions {
  double tol = 1e-10;  // relative residual ||Ax - b|| / ||b||
  int max_iter = 0;    // 0 selects 10 * size
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Jacobi-preconditioned conjugate gradients. A system without constraints
// whose rows sum to zero is reported as SingularSystem.
NodalField solve_spd(const SparseSystem& system, const SolveOptions& options = {},
                     SolveStats* stats = nullptr);

// Exact per-triangle gradient of a P1 field.
TriVec2 element_gradients(const Mesh& mesh, const NodalField& u);

// (u, v)_{H1} = int u v + grad u . grad v, exact for P1 fields.
double h1_inner(const Mesh& mesh, const NodalField& u, const NodalField& v);
double h1_norm(const Mesh& mesh, const NodalField& u);

// Load vector b_i = sum_T |T| V_T . grad(phi_i)|_T, i.e. int V . grad(phi_i).
Eigen::VectorXd weak_divergence_rhs(const Mesh& mesh, const TriVec2& V);

// max_i |u_i|, the C(Omega) norm of a P1 field.
double max_norm(const NodalField& u);

}  // namespace mreit

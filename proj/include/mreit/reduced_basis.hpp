#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <vector>

namespace mreit {

// Mesh- and drive-dependent data behind the residual error estimator.
//
// The test space is the set of P1 fields vanishing on the drive's electrode
// nodes. lambda_min is a certified lower bound of
//   min_v  int |grad v|^2 / ||v||_{H1}^2
// over that space, obtained by inverse iteration on the pencil
// (stiffness, H1 gram) and shifted down by the residual bound
// |rho - lambda| <= ||K x - rho G x||_{G^-1} for G-normalized x.
// Since the element coefficient is a vertex mean, b(v, v; sigma) >=
// min(sigma) * lambda_min * ||v||^2, so alpha(sigma) = min(sigma) * lambda_min.
struct EstimatorContext {
  using Factor = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>;

  Drive drive = Drive::First;
  std::vector<int> free_nodes;  // nodes off the drive's electrodes
  double lambda_min = 0.0;      // certified lower bound
  double rayleigh = 0.0;        // converged Rayleigh quotient
  double eig_residual = 0.0;    // relative residual of the eigenpair
  int eig_iterations = 0;
  std::shared_ptr<const Factor> gram_factor;  // H1 gram on free nodes

  double alpha(const NodalField& sigma) const { return sigma.minCoeff() * lambda_min; }
};

EstimatorContext make_estimator_context(const Mesh& mesh, Drive drive);

// Affine reduced space for one drive: lifting + span of zero-trace basis
// fields, pairwise orthonormal in H1.
class ReducedSpace {
 public:
  // The lifting is the forward solution for sigma = 1.
  static ReducedSpace init(const Mesh& mesh, Drive drive, const SolveOptions& options = {});
  // Rebuilds a stored space; validates traces and orthonormality.
  static ReducedSpace from_parts(const Mesh& mesh, Drive drive, NodalField lifting,
                                 std::vector<NodalField> basis);

  // Adds snapshot - lifting after two modified Gram-Schmidt sweeps in H1.
  // Returns false (space unchanged) when the remainder is below
  // drop_tol * ||snapshot||_{H1}. Throws TraceMismatch if the snapshot does
  // not carry the drive's Dirichlet data.
  bool enrich(const Mesh& mesh, const NodalField& snapshot, double drop_tol = 1e-8);

  Drive drive() const { return drive_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  const NodalField& lifting() const { return lifting_; }
  const std::vector<NodalField>& basis() const { return basis_; }
  const std::vector<int>& dirichlet_nodes() const { return dirichlet_; }

 private:
  void check_trace(const NodalField& field, double plus, double minus, double tol) const;

  Drive drive_ = Drive::First;
  NodalField lifting_;
  std::vector<NodalField> basis_;
  std::vector<int> plus_nodes_;
  std::vector<int> minus_nodes_;
  std::vector<int> dirichlet_;
};

ReducedSpace init_space(const Mesh& mesh, Drive drive);
ReducedSpace enrich(ReducedSpace space, const Mesh& mesh, const NodalField& snapshot,
                    double drop_tol = 1e-8);

struct ReducedSolution {
  NodalField u;                  // lifting + sum c_i psi_i
  Eigen::VectorXd coefficients;  // c
  double condition = 1.0;        // spectral condition number of B_N
};

// Galerkin projection: B_N = Psi^T K Psi, f_N = -Psi^T K lifting.
ReducedSolution solve_reduced(const ReducedSpace& space, const SparseMatrix& stiffness);
ReducedSolution solve_reduced(const ReducedSpace& space, const Mesh& mesh, const NodalField& sigma);

// Delta_N = ||v_r||_{H1} / alpha(sigma), v_r the Riesz representative of
// r(v) = -b(u_N, v; sigma) on the zero-trace test space.
double error_estimate(const EstimatorContext& ctx, const SparseMatrix& stiffness,
                      const NodalField& sigma, const NodalField& u_n);
double error_estimate(const ReducedSpace& space, const EstimatorContext& ctx, const Mesh& mesh,
                      const NodalField& sigma, const NodalField& u_n);

}  // namespace mreit

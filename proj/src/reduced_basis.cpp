#include "mreit/reduced_basis.hpp"

#include "mreit/errors.hpp"
#include "mreit/forward.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mreit {

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

ColMatrix free_block(const SparseMatrix& a, const std::vector<int>& index) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.nonZeros());
  int nfree = 0;
  for (int v : index) nfree += v >= 0;
  for (int row = 0; row < a.outerSize(); ++row) {
    if (index[row] < 0) continue;
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (index[col] >= 0) trips.emplace_back(index[row], index[col], it.value());
    }
  }
  ColMatrix out(nfree, nfree);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

std::vector<int> sorted_union(std::vector<int> a, const std::vector<int>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

EstimatorContext make_estimator_context(const Mesh& mesh, Drive drive) {
  EstimatorContext ctx;
  ctx.drive = drive;
  const auto constrained = sorted_union(mesh.tagged_nodes(positive_tag(drive)),
                                        mesh.tagged_nodes(negative_tag(drive)));
  if (constrained.empty()) throw Error(ErrorKind::ElectrodeEmpty, "drive has no electrode nodes");

  std::vector<int> index(mesh.num_nodes(), 0);
  for (int i : constrained) index[i] = -1;
  for (int i = 0, next = 0; i < mesh.num_nodes(); ++i) {
    if (index[i] < 0) continue;
    index[i] = next++;
    ctx.free_nodes.push_back(i);
  }

  const SparseMatrix stiff = assemble_stiffness(mesh, NodalField::Ones(mesh.num_nodes()));
  const SparseMatrix gram = assemble_mass(mesh) + stiff;
  const ColMatrix k = free_block(stiff, index);
  const ColMatrix g = free_block(gram, index);

  auto gram_factor = std::make_shared<EstimatorContext::Factor>(g);
  if (gram_factor->info() != Eigen::Success) {
    throw Error(ErrorKind::SingularSystem, "H1 gram factorization failed");
  }
  Eigen::SimplicialLDLT<ColMatrix> stiff_factor(k);
  if (stiff_factor.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularSystem, "constrained stiffness factorization failed");
  }

  // Inverse iteration for the smallest eigenvalue of K x = lambda G x.
  Eigen::VectorXd x = Eigen::VectorXd::Ones(k.rows());
  x /= std::sqrt(x.dot(g * x));
  double rho = x.dot(k * x);
  Eigen::VectorXd res = k * x - rho * (g * x);
  double rel = res.norm() / (k * x).norm();
  int it = 0;
  for (; it < 1000 && rel >= 1e-11; ++it) {
    x = stiff_factor.solve(g * x);
    x /= std::sqrt(x.dot(g * x));
    const Eigen::VectorXd kx = k * x;
    rho = x.dot(kx);
    res = kx - rho * (g * x);
    rel = res.norm() / kx.norm();
  }
  if (rel >= 1e-10) throw NoConvergence(it, rel);

  const double shift = std::sqrt(std::max(0.0, res.dot(gram_factor->solve(res))));
  ctx.rayleigh = rho;
  ctx.lambda_min = rho - shift;
  ctx.eig_residual = rel;
  ctx.eig_iterations = it;
  ctx.gram_factor = std::move(gram_factor);
  if (!(ctx.lambda_min > 0.0)) {
    throw Error(ErrorKind::NonCoercive, "coercivity lower bound is not positive");
  }
  return ctx;
}

ReducedSpace ReducedSpace::init(const Mesh& mesh, Drive drive, const SolveOptions& options) {
  ReducedSpace s;
  s.drive_ = drive;
  s.plus_nodes_ = mesh.tagged_nodes(positive_tag(drive));
  s.minus_nodes_ = mesh.tagged_nodes(negative_tag(drive));
  s.dirichlet_ = sorted_union(s.plus_nodes_, s.minus_nodes_);
  s.lifting_ = solve_forward(mesh, NodalField::Ones(mesh.num_nodes()), {drive}, options);
  return s;
}

ReducedSpace ReducedSpace::from_parts(const Mesh& mesh, Drive drive, NodalField lifting,
                                      std::vector<NodalField> basis) {
  ReducedSpace s;
  s.drive_ = drive;
  s.plus_nodes_ = mesh.tagged_nodes(positive_tag(drive));
  s.minus_nodes_ = mesh.tagged_nodes(negative_tag(drive));
  if (s.plus_nodes_.empty() || s.minus_nodes_.empty()) {
    throw Error(ErrorKind::ElectrodeEmpty, "drive has no electrode nodes");
  }
  s.dirichlet_ = sorted_union(s.plus_nodes_, s.minus_nodes_);
  if (lifting.size() != mesh.num_nodes()) {
    throw Error(ErrorKind::MeshMismatch, "lifting does not match mesh");
  }
  s.lifting_ = std::move(lifting);
  s.check_trace(s.lifting_, 1.0, 0.0, 0.0);
  for (const auto& psi : basis) {
    if (psi.size() != mesh.num_nodes()) throw Error(ErrorKind::MeshMismatch, "basis field size");
    s.check_trace(psi, 0.0, 0.0, 0.0);
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(h1_inner(mesh, basis[i], basis[j]) - expected) > 1e-10) {
        throw Error(ErrorKind::InvalidArgument, "stored basis is not H1-orthonormal");
      }
    }
  }
  s.basis_ = std::move(basis);
  return s;
}

void ReducedSpace::check_trace(const NodalField& field, double plus, double minus, double tol) const {
  for (int i : plus_nodes_) {
    if (std::abs(field[i] - plus) > tol) {
      throw Error(ErrorKind::TraceMismatch,
                  "field violates electrode data at node " + std::to_string(i));
    }
  }
  for (int i : minus_nodes_) {
    if (std::abs(field[i] - minus) > tol) {
      throw Error(ErrorKind::TraceMismatch,
                  "field violates electrode data at node " + std::to_string(i));
    }
  }
}

bool ReducedSpace::enrich(const Mesh& mesh, const NodalField& snapshot, double drop_tol) {
  if (snapshot.size() != mesh.num_nodes()) {
    throw Error(ErrorKind::MeshMismatch, "snapshot does not match mesh");
  }
  check_trace(snapshot, 1.0, 0.0, 1e-12);

  NodalField c = snapshot - lifting_;
  // Exact zero trace for the candidate.
  for (int i : dirichlet_) c[i] = 0.0;
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (const auto& psi : basis_) c -= h1_inner(mesh, c, psi) * psi;
  }
  const double norm = h1_norm(mesh, c);
  if (norm <= drop_tol * h1_norm(mesh, snapshot)) return false;
  basis_.push_back(c / norm);
  return true;
}

ReducedSpace init_space(const Mesh& mesh, Drive drive) { return ReducedSpace::init(mesh, drive); }

ReducedSpace enrich(ReducedSpace space, const Mesh& mesh, const NodalField& snapshot, double drop_tol) {
  space.enrich(mesh, snapshot, drop_tol);
  return space;
}

ReducedSolution solve_reduced(const ReducedSpace& space, const SparseMatrix& stiffness) {
  ReducedSolution out;
  const int n = space.dimension();
  out.u = space.lifting();
  out.coefficients = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;

  Eigen::MatrixXd k_psi(stiffness.rows(), n);
  for (int j = 0; j < n; ++j) k_psi.col(j) = stiffness * space.basis()[j];
  Eigen::MatrixXd b(n, n);
  Eigen::VectorXd f(n);
  const Eigen::VectorXd k_lift = stiffness * space.lifting();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) b(i, j) = space.basis()[i].dot(k_psi.col(j));
    f[i] = -space.basis()[i].dot(k_lift);
  }
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  out.condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(lo > 0.0) || out.condition > 1e12) throw IllConditionedReducedSystem(out.condition);

  out.coefficients = b.ldlt().solve(f);
  for (int i = 0; i < n; ++i) out.u += out.coefficients[i] * space.basis()[i];
  return out;
}

ReducedSolution solve_reduced(const ReducedSpace& space, const Mesh& mesh, const NodalField& sigma) {
  return solve_reduced(space, assemble_stiffness(mesh, sigma));
}

double error_estimate(const EstimatorContext& ctx, const SparseMatrix& stiffness,
                      const NodalField& sigma, const NodalField& u_n) {
  const Eigen::VectorXd ku = stiffness * u_n;
  Eigen::VectorXd r(ctx.free_nodes.size());
  for (std::size_t k = 0; k < ctx.free_nodes.size(); ++k) r[k] = -ku[ctx.free_nodes[k]];
  const Eigen::VectorXd v = ctx.gram_factor->solve(r);
  const double riesz_norm = std::sqrt(std::max(0.0, r.dot(v)));
  return riesz_norm / ctx.alpha(sigma);
}

double error_estimate(const ReducedSpace& space, const EstimatorContext& ctx, const Mesh& mesh,
                      const NodalField& sigma, const NodalField& u_n) {
  if (space.drive() != ctx.drive) {
    throw Error(ErrorKind::InvalidArgument, "estimator context belongs to the other drive");
  }
  return error_estimate(ctx, assemble_stiffness(mesh, sigma), sigma, u_n);
}

}  // namespace mreit

#include "mreit/fem.hpp"

#include "mreit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace mreit {

namespace {

void require_positive(const NodalField& sigma) {
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(sigma[i])) {
      throw Error(ErrorKind::NonCoercive,
                  "conductivity must be positive and finite (node " + std::to_string(i) + ")");
    }
  }
}

void require_size(const Mesh& mesh, const NodalField& f, const char* what) {
  if (f.size() != mesh.num_nodes()) {
    throw Error(ErrorKind::MeshMismatch, std::string(what) + " does not match mesh node count");
  }
}

}  // namespace

double vertex_mean(const Mesh& mesh, const NodalField& f, int t) {
  const auto& tri = mesh.triangle(t);
  return (f[tri[0]] + f[tri[1]] + f[tri[2]]) / 3.0;
}

StiffnessAssembler::StiffnessAssembler(const Mesh& mesh) : mesh_(&mesh) {
  const int nn = mesh.num_nodes();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (const auto& tri : mesh.triangles()) {
    for (int a : tri) {
      for (int b : tri) trips.emplace_back(a, b, 0.0);
    }
  }
  pattern_.resize(nn, nn);
  pattern_.setFromTriplets(trips.begin(), trips.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  auto slot = [&](int row, int col) {
    const int* first = inner + outer[row];
    const int* last = inner + outer[row + 1];
    return static_cast<int>(std::lower_bound(first, last, col) - inner);
  };
  slots_.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) slots_[t][3 * a + b] = slot(tri[a], tri[b]);
    }
  }
}

SparseMatrix StiffnessAssembler::assemble(const NodalField& sigma) const {
  const Mesh& mesh = *mesh_;
  require_size(mesh, sigma, "conductivity");
  require_positive(sigma);

  SparseMatrix k = pattern_;
  double* values = k.valuePtr();
  std::fill(values, values + k.nonZeros(), 0.0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double weight = vertex_mean(mesh, sigma, t) * mesh.area(t);
    for (int a = 0; a < 3; ++a) {
      const Point& ga = mesh.shape_gradient(t, a);
      for (int b = 0; b < 3; ++b) {
        values[slots_[t][3 * a + b]] += weight * ga.dot(mesh.shape_gradient(t, b));
      }
    }
  }
  return k;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const NodalField& sigma) {
  return StiffnessAssembler(mesh).assemble(sigma);
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * static_cast<std::size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const double a = mesh.area(t) / 12.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) trips.emplace_back(tri[i], tri[j], i == j ? 2.0 * a : a);
    }
  }
  SparseMatrix m(mesh.num_nodes(), mesh.num_nodes());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

SparseMatrix assemble_h1_gram(const Mesh& mesh) {
  SparseMatrix g = assemble_mass(mesh) + assemble_stiffness(mesh, NodalField::Ones(mesh.num_nodes()));
  g.makeCompressed();
  return g;
}

SparseSystem apply_dirichlet(SparseSystem system, std::span<const Constraint> constraints) {
  const auto n = system.matrix.rows();
  if (system.rhs.size() != n || system.matrix.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "system matrix and rhs sizes disagree");
  }

  std::unordered_map<int, double> fixed;
  for (const auto& c : system.constraints) fixed.emplace(c.node, c.value);
  std::vector<Constraint> fresh;
  for (const auto& c : constraints) {
    if (c.node < 0 || c.node >= n) {
      throw Error(ErrorKind::InvalidArgument, "constraint node out of range");
    }
    auto [it, inserted] = fixed.emplace(c.node, c.value);
    if (!inserted) {
      if (it->second != c.value) {
        throw Error(ErrorKind::InvalidArgument,
                    "conflicting constraints on node " + std::to_string(c.node));
      }
      continue;
    }
    fresh.push_back(c);
  }
  if (fresh.empty()) return system;

  std::vector<char> is_fixed(n, 0);
  std::vector<double> value(n, 0.0);
  for (const auto& c : fresh) {
    is_fixed[c.node] = 1;
    value[c.node] = c.value;
  }

  SparseMatrix& a = system.matrix;
  a.makeCompressed();
  for (Eigen::Index row = 0; row < n; ++row) {
    for (SparseMatrix::InnerIterator it(a, row); it; ++it) {
      const auto col = it.col();
      if (is_fixed[row]) {
        it.valueRef() = row == col ? 1.0 : 0.0;
      } else if (is_fixed[col]) {
        system.rhs[row] -= it.value() * value[col];
        it.valueRef() = 0.0;
      }
    }
  }
  for (const auto& c : fresh) {
    if (a.coeff(c.node, c.node) != 1.0) a.coeffRef(c.node, c.node) = 1.0;
    system.rhs[c.node] = c.value;
  }
  a.prune(0.0);
  system.constraints.insert(system.constraints.end(), fresh.begin(), fresh.end());
  return system;
}

NodalField solve_spd(const SparseSystem& system, const SolveOptions& options, SolveStats* stats) {
  const SparseMatrix& a = system.matrix;
  const Eigen::VectorXd& b = system.rhs;
  const auto n = a.rows();

  if (system.constraints.empty() && n > 0) {
    double amax = 0.0;
    for (int k = 0; k < a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) amax = std::max(amax, std::abs(it.value()));
    }
    const Eigen::VectorXd row_sums = a * Eigen::VectorXd::Ones(n);
    if (row_sums.cwiseAbs().maxCoeff() <= 1e-12 * amax) {
      throw Error(ErrorKind::SingularSystem, "system has constants in its kernel (no Dirichlet data)");
    }
  }

  const Eigen::VectorXd diag = a.diagonal();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(diag[i] > 0.0)) {
      throw Error(ErrorKind::SingularSystem, "non-positive diagonal entry in SPD solve");
    }
  }
  const Eigen::VectorXd inv_diag = diag.cwiseInverse();

  const double bnorm = b.norm();
  NodalField x = NodalField::Zero(n);
  if (bnorm == 0.0) {
    if (stats) *stats = {0, 0.0};
    return x;
  }
  const double target = options.tol * bnorm;
  const int max_iter = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * n);

  // Eliminated rows are decoupled unit rows: start them at their prescribed
  // values so they stay exact and never enter the Krylov space.
  for (const auto& c : system.constraints) x[c.node] = c.value;
  Eigen::VectorXd r = b - a * x;
  Eigen::VectorXd z(n), p(n), q(n);
  int it = 0;
  double true_norm = r.norm();
  // The recursive residual drifts from b - Ax; restart from the true residual
  // until the true residual meets the tolerance.
  while (true_norm > target && it < max_iter) {
    z = inv_diag.cwiseProduct(r);
    p = z;
    double rho = r.dot(z);
    double rnorm = r.norm();
    while (rnorm > target && it < max_iter) {
      q.noalias() = a * p;
      const double curvature = p.dot(q);
      if (!(curvature > 0.0)) {
        throw Error(ErrorKind::SingularSystem, "CG breakdown: matrix is not positive definite");
      }
      const double alpha = rho / curvature;
      x += alpha * p;
      r -= alpha * q;
      z = inv_diag.cwiseProduct(r);
      const double rho_next = r.dot(z);
      p = z + (rho_next / rho) * p;
      rho = rho_next;
      rnorm = r.norm();
      ++it;
    }
    r = b - a * x;
    true_norm = r.norm();
  }
  if (stats) *stats = {it, true_norm / bnorm};
  if (true_norm > target) throw NoConvergence(it, true_norm / bnorm);
  return x;
}

TriVec2 element_gradients(const Mesh& mesh, const NodalField& u) {
  require_size(mesh, u, "field");
  TriVec2 out(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    // grad(phi_0) = -grad(phi_1) - grad(phi_2); differencing keeps constants exact.
    out[t] = (u[tri[1]] - u[tri[0]]) * mesh.shape_gradient(t, 1) +
             (u[tri[2]] - u[tri[0]]) * mesh.shape_gradient(t, 2);
  }
  return out;
}

double h1_inner(const Mesh& mesh, const NodalField& u, const NodalField& v) {
  require_size(mesh, u, "field");
  require_size(mesh, v, "field");
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const double u0 = u[tri[0]], u1 = u[tri[1]], u2 = u[tri[2]];
    const double v0 = v[tri[0]], v1 = v[tri[1]], v2 = v[tri[2]];
    // int_T u v = |T|/12 (sum u_i v_i + (sum u_i)(sum v_i))
    const double mass = (u0 * v0 + u1 * v1 + u2 * v2 + (u0 + u1 + u2) * (v0 + v1 + v2)) / 12.0;
    const Point gu = (u1 - u0) * mesh.shape_gradient(t, 1) + (u2 - u0) * mesh.shape_gradient(t, 2);
    const Point gv = (v1 - v0) * mesh.shape_gradient(t, 1) + (v2 - v0) * mesh.shape_gradient(t, 2);
    sum += mesh.area(t) * (mass + gu.dot(gv));
  }
  return sum;
}

double h1_norm(const Mesh& mesh, const NodalField& u) {
  return std::sqrt(std::max(0.0, h1_inner(mesh, u, u)));
}

Eigen::VectorXd weak_divergence_rhs(const Mesh& mesh, const TriVec2& V) {
  if (static_cast<int>(V.size()) != mesh.num_triangles()) {
    throw Error(ErrorKind::MeshMismatch, "vector field does not match triangle count");
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) b[tri[k]] += mesh.area(t) * V[t].dot(mesh.shape_gradient(t, k));
  }
  return b;
}

double max_norm(const NodalField& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

}  // namespace mreit

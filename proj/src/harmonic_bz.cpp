#include "mreit/harmonic_bz.hpp"

#include "mreit/errors.hpp"
#include "mreit/forward.hpp"

#include <chrono>
#include <cmath>
#include <future>

namespace mreit {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void check_data(const Mesh& mesh, const LaplacianBzData& data) {
  if (data.lap1.size() != mesh.num_triangles() || data.lap2.size() != mesh.num_triangles()) {
    throw Error(ErrorKind::MeshMismatch, "Bz data does not match mesh triangle count");
  }
}

}  // namespace

std::string_view status_name(RunStatus status) {
  return status == RunStatus::Converged ? "converged" : "max_iterations";
}

TriMat2 assemble_A(const TriVec2& grad_u1, const TriVec2& grad_u2) {
  if (grad_u1.size() != grad_u2.size()) {
    throw Error(ErrorKind::MeshMismatch, "gradient fields have different lengths");
  }
  TriMat2 a(grad_u1.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    a[t] << grad_u1[t].y(), -grad_u1[t].x(), grad_u2[t].y(), -grad_u2[t].x();
  }
  return a;
}

TriVec2 vector_field(const Mesh& mesh, const NodalField& sigma, const TriMat2& A,
                     const LaplacianBzData& data, const RegionMasks& masks, const BzConfig& cfg) {
  check_data(mesh, data);
  TriVec2 v(mesh.num_triangles(), Eigen::Vector2d::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!masks.inner[t]) continue;
    const Eigen::Matrix2d& a = A[t];
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    const double scale = a.row(0).norm() * a.row(1).norm();
    if (det == 0.0 || std::abs(det) < cfg.det_floor * scale) {
      if (cfg.det_guard == DetGuard::ZeroOut) continue;
      throw SingularCoefficientMatrix(t, det);
    }
    const double b1 = data.lap1[t], b2 = data.lap2[t];
    // Adjugate inverse.
    const Eigen::Vector2d sol((a(1, 1) * b1 - a(0, 1) * b2) / det, (a(0, 0) * b2 - a(1, 0) * b1) / det);
    v[t] = sol / (cfg.mu0 * vertex_mean(mesh, sigma, t));
  }
  return v;
}

LogConductivitySolver::LogConductivitySolver(const Mesh& mesh, double sigma_b, SolveOptions options)
    : mesh_(&mesh), fixed_(mesh.num_nodes(), 0), options_(options) {
  if (!(sigma_b > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_b must be positive");
  const double boundary = std::log(sigma_b);
  std::vector<Constraint> constraints;
  for (int i : mesh.boundary_nodes()) {
    constraints.push_back({i, boundary});
    fixed_[i] = 1;
  }
  system_ = apply_dirichlet(
      {assemble_stiffness(mesh, NodalField::Ones(mesh.num_nodes())),
       Eigen::VectorXd::Zero(mesh.num_nodes()), {}},
      constraints);
}

NodalField LogConductivitySolver::solve(const TriVec2& V) const {
  SparseSystem sys = system_;
  const Eigen::VectorXd load = weak_divergence_rhs(*mesh_, V);
  for (int i = 0; i < mesh_->num_nodes(); ++i) {
    if (!fixed_[i]) sys.rhs[i] += load[i];
  }
  return solve_spd(sys, options_);
}

NodalField update_log_sigma(const Mesh& mesh, const TriVec2& V, const BzConfig& cfg) {
  return LogConductivitySolver(mesh, cfg.sigma_b, cfg.solve).solve(V);
}

NodalField harmonic_update(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                           const NodalField& sigma, const NodalField& u1, const NodalField& u2,
                           const LogConductivitySolver& poisson, const BzConfig& cfg) {
  const TriMat2 a = assemble_A(element_gradients(mesh, u1), element_gradients(mesh, u2));
  return poisson.solve(vector_field(mesh, sigma, a, data, masks, cfg));
}

ReconstructionResult reconstruct_bz(const Mesh& mesh, const RegionMasks& masks,
                                    const LaplacianBzData& data, const BzConfig& cfg) {
  return reconstruct_bz(mesh, masks, data, NodalField::Constant(mesh.num_nodes(), cfg.sigma_b), cfg);
}

ReconstructionResult reconstruct_bz(const Mesh& mesh, const RegionMasks& masks,
                                    const LaplacianBzData& data, const NodalField& sigma0,
                                    const BzConfig& cfg) {
  check_data(mesh, data);
  if (!(cfg.epsilon > 0.0) || cfg.det_floor < 0.0 || cfg.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "invalid Harmonic Bz configuration");
  }
  const auto start = Clock::now();
  ReconstructionResult res;

  auto t0 = Clock::now();
  const StiffnessAssembler assembler(mesh);
  const LogConductivitySolver poisson(mesh, cfg.sigma_b, cfg.solve);
  res.phases.setup_ms = elapsed_ms(t0);

  res.sigma = sigma0;
  res.log_sigma = sigma0.array().log().matrix();
  res.status = RunStatus::MaxIterations;

  for (int n = 0; n < cfg.max_iterations; ++n) {
    t0 = Clock::now();
    const SparseMatrix k = assembler.assemble(res.sigma);
    res.phases.assembly_ms += elapsed_ms(t0);

    t0 = Clock::now();
    NodalField u1, u2;
    if (cfg.threads > 1) {
      auto f1 = std::async(std::launch::async, [&] {
        return solve_forward(mesh, k, res.sigma, {Drive::First}, cfg.solve);
      });
      u2 = solve_forward(mesh, k, res.sigma, {Drive::Second}, cfg.solve);
      u1 = f1.get();
    } else {
      u1 = solve_forward(mesh, k, res.sigma, {Drive::First}, cfg.solve);
      u2 = solve_forward(mesh, k, res.sigma, {Drive::Second}, cfg.solve);
    }
    res.forward_solves += 2;
    res.phases.full_solve_ms += elapsed_ms(t0);

    t0 = Clock::now();
    NodalField next = harmonic_update(mesh, masks, data, res.sigma, u1, u2, poisson, cfg);
    res.phases.poisson_ms += elapsed_ms(t0);

    const double diff = max_norm(next - res.log_sigma);
    res.log_sigma = std::move(next);
    res.sigma = res.log_sigma.array().exp().matrix();
    res.diff_history.push_back(diff);
    res.iterations = n + 1;
    res.final_diff = diff;
    if (diff < cfg.epsilon) {
      res.status = RunStatus::Converged;
      break;
    }
  }
  res.wall_ms = elapsed_ms(start);
  return res;
}

}  // namespace mreit

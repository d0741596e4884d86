#include "mreit/forward.hpp"

#include "mreit/errors.hpp"

#include <string>

namespace mreit {

std::vector<Constraint> drive_constraints(const Mesh& mesh, Drive drive) {
  const auto plus = mesh.tagged_nodes(positive_tag(drive));
  const auto minus = mesh.tagged_nodes(negative_tag(drive));
  if (plus.empty() || minus.empty()) {
    throw Error(ErrorKind::ElectrodeEmpty,
                "electrode pair " + std::to_string(static_cast<int>(drive)) + " has no nodes");
  }
  std::vector<Constraint> out;
  out.reserve(plus.size() + minus.size());
  for (int i : plus) out.push_back({i, 1.0});
  for (int i : minus) out.push_back({i, 0.0});
  return out;
}

NodalField solve_forward(const Mesh& mesh, const SparseMatrix& stiffness, const NodalField& sigma,
                         const DriveConfig& drive, const SolveOptions& options) {
  const auto constraints = drive_constraints(mesh, drive.drive);
  SparseSystem system{stiffness, Eigen::VectorXd::Zero(mesh.num_nodes()), {}};
  system = apply_dirichlet(std::move(system), constraints);
  NodalField u = solve_spd(system, options);
  if (drive.apply_scaling) {
    if (!(drive.current > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "scaled drive needs a positive current");
    }
    u *= drive.current / electrode_flux(mesh, sigma, u, positive_tag(drive.drive));
  }
  return u;
}

NodalField solve_forward(const Mesh& mesh, const NodalField& sigma, const DriveConfig& drive,
                         const SolveOptions& options) {
  return solve_forward(mesh, assemble_stiffness(mesh, sigma), sigma, drive, options);
}

double electrode_flux(const Mesh& mesh, const NodalField& sigma, const NodalField& u,
                      BoundaryTag electrode) {
  const Eigen::VectorXd ku = assemble_stiffness(mesh, sigma) * u;
  double flux = 0.0;
  for (int i : mesh.tagged_nodes(electrode)) flux += ku[i];
  return flux;
}

double total_flux(const Mesh& mesh, const NodalField& sigma, const NodalField& u) {
  return (assemble_stiffness(mesh, sigma) * u).sum();
}

}  // namespace mreit

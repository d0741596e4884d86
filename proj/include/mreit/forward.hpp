#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"

#include <vector>

namespace mreit {

struct DriveConfig {
  Drive drive = Drive::First;
  double current = 1.0;        // I_j, amperes
  bool apply_scaling = false;  // shunt-model rescaling to carry `current`
};

// Dirichlet data of a drive: 1 on the positive electrode, 0 on the negative one.
// Throws ElectrodeEmpty when either electrode has no nodes.
std::vector<Constraint> drive_constraints(const Mesh& mesh, Drive drive);

// Solves div(sigma grad u) = 0 with u = 1 on E+, u = 0 on E-, and zero flux on
// the remaining boundary.
NodalField solve_forward(const Mesh& mesh, const NodalField& sigma, const DriveConfig& drive,
                         const SolveOptions& options = {});

// Same as above with a preassembled stiffness K(sigma).
NodalField solve_forward(const Mesh& mesh, const SparseMatrix& stiffness, const NodalField& sigma,
                         const DriveConfig& drive, const SolveOptions& options = {});

// Variational flux b(u, chi; sigma), chi the nodal indicator of the electrode.
// Equals int_E sigma du/dn ds with the outward normal, so it is positive on E+.
double electrode_flux(const Mesh& mesh, const NodalField& sigma, const NodalField& u,
                      BoundaryTag electrode);

// Total variational flux over the whole boundary, b(u, 1; sigma).
double total_flux(const Mesh& mesh, const NodalField& sigma, const NodalField& u);

}  // namespace mreit

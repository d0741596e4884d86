#pragma once

#include "mreit/fem.hpp"

#include <vector>

namespace mreit {

// ||a - b||_max / ||b||_max over nodal values. The second argument is the
// reference whose norm normalizes the difference.
double relative_error(const NodalField& a, const NodalField& b);

// Same, restricted to the listed nodes (e.g. the vertices of Omega_c triangles).
double relative_error(const NodalField& a, const NodalField& b, const std::vector<int>& nodes);

// 100 (t_ref - t_new) / t_ref; positive when the new run is faster.
double speedup_percent(double t_ref_ms, double t_new_ms);

}  // namespace mreit

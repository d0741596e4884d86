#include "mreit/metrics.hpp"

#include "mreit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mreit {

double relative_error(const NodalField& a, const NodalField& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::MeshMismatch, "fields differ in length");
  const double denom = max_norm(b);
  const double num = max_norm(a - b);
  if (denom == 0.0) {
    if (num == 0.0) return 0.0;
    throw Error(ErrorKind::InvalidArgument, "reference field is identically zero");
  }
  return num / denom;
}

double relative_error(const NodalField& a, const NodalField& b, const std::vector<int>& nodes) {
  if (a.size() != b.size()) throw Error(ErrorKind::MeshMismatch, "fields differ in length");
  double num = 0.0, denom = 0.0;
  for (int i : nodes) {
    if (i < 0 || i >= a.size()) throw Error(ErrorKind::InvalidArgument, "node index out of range");
    num = std::max(num, std::abs(a[i] - b[i]));
    denom = std::max(denom, std::abs(b[i]));
  }
  if (denom == 0.0) {
    if (num == 0.0) return 0.0;
    throw Error(ErrorKind::InvalidArgument, "reference field vanishes on the selected nodes");
  }
  return num / denom;
}

double speedup_percent(double t_ref_ms, double t_new_ms) {
  if (!(t_ref_ms > 0.0)) return 0.0;
  return 100.0 * (t_ref_ms - t_new_ms) / t_ref_ms;
}

}  // namespace mreit

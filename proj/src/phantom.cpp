#include "mreit/phantom.hpp"

#include "mreit/errors.hpp"
#include "mreit/shepp_logan_table.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mreit {

namespace {

template <typename F>
PixelPhantom sample(int nx, int ny, F&& f) {
  if (nx < 1 || ny < 1) throw Error(ErrorKind::InvalidArgument, "phantom needs at least one pixel");
  PixelPhantom p{nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny)};
  for (int j = 0; j < ny; ++j) {
    const double y = -1.0 + (2.0 * j + 1.0) / ny;
    for (int i = 0; i < nx; ++i) {
      const double x = -1.0 + (2.0 * i + 1.0) / nx;
      p.values[static_cast<std::size_t>(j) * nx + i] = f(x, y);
    }
  }
  return p;
}

double bump(double x, double y, double cx, double cy, double radius) {
  const double rho2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (radius * radius);
  if (rho2 >= 1.0) return 0.0;
  const double s = 1.0 - rho2;
  return s * s * s;
}

}  // namespace

double PixelPhantom::min() const { return *std::min_element(values.begin(), values.end()); }
double PixelPhantom::max() const { return *std::max_element(values.begin(), values.end()); }

double shepp_logan_value(double x, double y) {
  double v = 0.0;
  for (const auto& e : kSheppLogan) {
    const double phi = e.angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(phi), s = std::sin(phi);
    const double dx = x - e.center_x, dy = y - e.center_y;
    const double u = dx * c + dy * s;
    const double w = -dx * s + dy * c;
    if ((u * u) / (e.semi_x * e.semi_x) + (w * w) / (e.semi_y * e.semi_y) <= 1.0) v += e.intensity;
  }
  return v;
}

PixelPhantom shepp_logan(int nx, int ny, double offset) {
  return sample(nx, ny, [offset](double x, double y) { return offset + shepp_logan_value(x, y); });
}

PixelPhantom constant_phantom(int nx, int ny, double value) {
  return sample(nx, ny, [value](double, double) { return value; });
}

double smooth_bumps_value(double x, double y) {
  return 1.0 + 0.30 * bump(x, y, -0.30, 0.20, 0.35) + 0.20 * bump(x, y, 0.35, -0.25, 0.30) +
         0.15 * bump(x, y, 0.25, 0.45, 0.20);
}

PixelPhantom smooth_bumps(int nx, int ny) { return sample(nx, ny, smooth_bumps_value); }

NodalField pixels_to_nodal(const PixelPhantom& phantom, const Mesh& mesh) {
  NodalField out(mesh.num_nodes());
  auto locate = [](double coord, int count, int& lo, double& frac) {
    const double s = std::clamp((coord + 1.0) * 0.5 * count - 0.5, 0.0, count - 1.0);
    lo = std::min(static_cast<int>(std::floor(s)), std::max(count - 2, 0));
    frac = count == 1 ? 0.0 : s - lo;
  };
  for (int k = 0; k < mesh.num_nodes(); ++k) {
    int i = 0, j = 0;
    double fx = 0.0, fy = 0.0;
    locate(mesh.node(k).x(), phantom.nx, i, fx);
    locate(mesh.node(k).y(), phantom.ny, j, fy);
    const int i1 = std::min(i + 1, phantom.nx - 1);
    const int j1 = std::min(j + 1, phantom.ny - 1);
    out[k] = (1 - fx) * (1 - fy) * phantom.at(i, j) + fx * (1 - fy) * phantom.at(i1, j) +
             (1 - fx) * fy * phantom.at(i, j1) + fx * fy * phantom.at(i1, j1);
  }
  return out;
}

}  // namespace mreit

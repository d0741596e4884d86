#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"

#include <vector>

namespace mreit {

// Pixel image covering [-1,1]^2. Pixel (i, j) has its center at
// x = -1 + (2i + 1) / nx, y = -1 + (2j + 1) / ny; row j = 0 is the bottom.
struct PixelPhantom {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // row-major, values[j * nx + i]

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  double min() const;
  double max() const;
};

// Sum of the intensities of all Shepp-Logan ellipses containing (x, y).
double shepp_logan_value(double x, double y);

PixelPhantom shepp_logan(int nx, int ny, double offset = 1.0);
PixelPhantom constant_phantom(int nx, int ny, double value = 1.0);

// Smooth low-contrast test object: 1 plus three disjoint C^2 bumps,
// values in [1, 1.3], supported inside the disk of radius 0.7.
double smooth_bumps_value(double x, double y);
PixelPhantom smooth_bumps(int nx, int ny);

// Bilinear interpolation of pixel centers at the mesh nodes, clamped at the
// image border. With n == nx == ny every node sits on a pixel corner.
NodalField pixels_to_nodal(const PixelPhantom& phantom, const Mesh& mesh);

}  // namespace mreit

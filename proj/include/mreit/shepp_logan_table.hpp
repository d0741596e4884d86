#pragma once

#include <array>

namespace mreit {

struct Ellipse {
  double intensity;
  double semi_x;  // semi-axis along the rotated x direction
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;  // counterclockwise rotation
};

// Classical ten-ellipse Shepp-Logan head phantom (original intensities, not the
// contrast-enhanced "modified" variant). Coordinates on [-1,1]^2, y up.
inline constexpr std::array<Ellipse, 10> kSheppLogan{{
    {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

}  // namespace mreit

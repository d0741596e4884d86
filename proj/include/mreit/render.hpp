#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

namespace mreit {

// Point samples of a P1 field at pixel centers. Row 0 is the top of the image
// (y = 1 side); pixel (c, r) samples x = -1 + (2c + 1) / width,
// y = 1 - (2r + 1) / height. A point on a shared edge or vertex takes the value
// from the lowest-indexed triangle containing it.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int col, int row) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

Raster rasterize(const Mesh& mesh, const NodalField& field, int width = 520, int height = 520);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 on top
  bool degenerate_range = false;     // min == max: every pixel is 128
};

// Linear map of [lo, hi] onto [0, 255] with round-half-up and clamping. Without
// an explicit range the raster's min and max are used.
GrayImage to_gray(const Raster& raster, std::optional<std::pair<double, double>> range = std::nullopt);

// Binary PGM (P5, maxval 255).
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace mreit

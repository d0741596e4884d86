#include "mreit/render.hpp"

#include "mreit/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <tuple>

namespace mreit {

namespace {

// Uniform bucket grid over [-1,1]^2 holding, per cell, the triangles whose
// bounding box touches it (in ascending index order).
class TriangleLocator {
 public:
  explicit TriangleLocator(const Mesh& mesh) : mesh_(mesh) {
    cells_ = std::max(1, static_cast<int>(std::sqrt(mesh.num_triangles() / 2.0)));
    buckets_.resize(static_cast<std::size_t>(cells_) * cells_);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
      for (int v : mesh.triangle(t)) {
        const Point& p = mesh.node(v);
        x0 = std::min(x0, p.x());
        x1 = std::max(x1, p.x());
        y0 = std::min(y0, p.y());
        y1 = std::max(y1, p.y());
      }
      const int c0 = cell(x0 - kSlack), c1 = cell(x1 + kSlack);
      const int r0 = cell(y0 - kSlack), r1 = cell(y1 + kSlack);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) buckets_[static_cast<std::size_t>(r) * cells_ + c].push_back(t);
      }
    }
  }

  // Lowest-indexed triangle containing p with its barycentric weights, or -1.
  int locate(const Point& p, std::array<double, 3>& w) const {
    const auto& bucket = buckets_[static_cast<std::size_t>(cell(p.y())) * cells_ + cell(p.x())];
    for (int t : bucket) {
      const auto& tri = mesh_.triangle(t);
      const Point& a = mesh_.node(tri[0]);
      for (int k = 0; k < 3; ++k) {
        // lambda_k(p) = lambda_k(a) + grad(phi_k).(p - a)
        w[k] = (k == 0 ? 1.0 : 0.0) + mesh_.shape_gradient(t, k).dot(p - a);
      }
      if (w[0] >= -kSlack && w[1] >= -kSlack && w[2] >= -kSlack) return t;
    }
    return -1;
  }

 private:
  static constexpr double kSlack = 1e-12;

  int cell(double v) const {
    const int c = static_cast<int>(std::floor((v + 1.0) / 2.0 * cells_));
    return std::clamp(c, 0, cells_ - 1);
  }

  const Mesh& mesh_;
  int cells_ = 1;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

Raster rasterize(const Mesh& mesh, const NodalField& field, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorKind::InvalidArgument, "image size must be positive");
  if (field.size() != mesh.num_nodes()) {
    throw Error(ErrorKind::MeshMismatch, "field does not match mesh node count");
  }
  const TriangleLocator locator(mesh);
  Raster out{width, height, std::vector<double>(static_cast<std::size_t>(width) * height)};
  std::array<double, 3> w{};
  for (int r = 0; r < height; ++r) {
    const double y = 1.0 - (2.0 * r + 1.0) / height;
    for (int c = 0; c < width; ++c) {
      const Point p(-1.0 + (2.0 * c + 1.0) / width, y);
      const int t = locator.locate(p, w);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (t >= 0) {
        const auto& tri = mesh.triangle(t);
        const double f0 = field[tri[0]];
        v = f0 + w[1] * (field[tri[1]] - f0) + w[2] * (field[tri[2]] - f0);
      }
      out.values[static_cast<std::size_t>(r) * width + c] = v;
    }
  }
  return out;
}

GrayImage to_gray(const Raster& raster, std::optional<std::pair<double, double>> range) {
  double lo, hi;
  if (range) {
    std::tie(lo, hi) = *range;
    if (!(lo <= hi)) throw Error(ErrorKind::InvalidArgument, "render range must satisfy lo <= hi");
  } else {
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (double v : raster.values) {
      if (std::isnan(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > hi) lo = hi = 0.0;
  }

  GrayImage img{raster.width, raster.height, std::vector<std::uint8_t>(raster.values.size(), 0), false};
  if (lo == hi) {
    img.degenerate_range = true;
    std::fill(img.pixels.begin(), img.pixels.end(), std::uint8_t{128});
    return img;
  }
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    const double v = raster.values[i];
    if (std::isnan(v)) continue;
    const double level = std::floor(255.0 * (v - lo) / (hi - lo) + 0.5);
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string magic;
  int maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || magic != "P5" || maxval != 255 || img.width < 1 || img.height < 1) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "' is not an 8-bit P5 image");
  }
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "' is truncated");
  }
  return img;
}

}  // namespace mreit

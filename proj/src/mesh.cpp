#include "mreit/mesh.hpp"

#include "mreit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace mreit {

namespace {

constexpr double kGeomTol = 1e-12;

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

}  // namespace

std::string_view tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::E1Plus: return "E1plus";
    case BoundaryTag::E1Minus: return "E1minus";
    case BoundaryTag::E2Plus: return "E2plus";
    case BoundaryTag::E2Minus: return "E2minus";
    case BoundaryTag::Insulated: return "Insulated";
  }
  return "Insulated";
}

BoundaryTag parse_tag(std::string_view name) {
  for (auto tag : {BoundaryTag::E1Plus, BoundaryTag::E1Minus, BoundaryTag::E2Plus,
                   BoundaryTag::E2Minus, BoundaryTag::Insulated}) {
    if (tag_name(tag) == name) return tag;
  }
  throw Error(ErrorKind::Parse, "unknown boundary tag '" + std::string(name) + "'");
}

BoundaryTag positive_tag(Drive drive) {
  return drive == Drive::First ? BoundaryTag::E1Plus : BoundaryTag::E2Plus;
}

BoundaryTag negative_tag(Drive drive) {
  return drive == Drive::First ? BoundaryTag::E1Minus : BoundaryTag::E2Minus;
}

Mesh Mesh::from_parts(std::vector<Point> nodes, std::vector<Triangle> triangles,
                      std::vector<BoundaryEdge> boundary) {
  Mesh mesh;
  mesh.nodes_ = std::move(nodes);
  mesh.triangles_ = std::move(triangles);
  mesh.boundary_ = std::move(boundary);

  const int nn = mesh.num_nodes();
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles_) {
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nn) {
        throw Error(ErrorKind::InvalidArgument, "triangle references node out of range");
      }
      ++edge_count[edge_key(tri[k], tri[(k + 1) % 3])];
    }
  }
  std::size_t outer = 0;
  for (const auto& [key, count] : edge_count) {
    if (count == 1) ++outer;
  }
  if (outer != mesh.boundary_.size()) {
    throw Error(ErrorKind::InvalidArgument, "boundary edges do not tile the mesh boundary");
  }
  for (const auto& e : mesh.boundary_) {
    auto it = edge_count.find(edge_key(e.a, e.b));
    if (it == edge_count.end() || it->second != 1) {
      throw Error(ErrorKind::InvalidArgument, "boundary edge is not an outer triangle edge");
    }
  }

  mesh.compute_geometry();
  return mesh;
}

void Mesh::compute_geometry() {
  area_.resize(triangles_.size());
  grad_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const Point& p0 = nodes_[triangles_[t][0]];
    const Point& p1 = nodes_[triangles_[t][1]];
    const Point& p2 = nodes_[triangles_[t][2]];
    const double twice = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
    if (!(twice > 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "triangle " + std::to_string(t) + " is degenerate or clockwise");
    }
    area_[t] = 0.5 * twice;
    grad_[t][0] = Point(p1.y() - p2.y(), p2.x() - p1.x()) / twice;
    grad_[t][1] = Point(p2.y() - p0.y(), p0.x() - p2.x()) / twice;
    grad_[t][2] = Point(p0.y() - p1.y(), p1.x() - p0.x()) / twice;
  }
}

Point Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (nodes_[tri[0]] + nodes_[tri[1]] + nodes_[tri[2]]) / 3.0;
}

std::vector<int> Mesh::tagged_nodes(BoundaryTag tag) const {
  std::vector<int> out;
  for (const auto& e : boundary_) {
    if (e.tag == tag) {
      out.push_back(e.a);
      out.push_back(e.b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> Mesh::boundary_nodes() const {
  std::vector<int> out;
  out.reserve(2 * boundary_.size());
  for (const auto& e : boundary_) {
    out.push_back(e.a);
    out.push_back(e.b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh Mesh::with_tags(std::vector<BoundaryEdge> boundary) const {
  if (boundary.size() != boundary_.size()) {
    throw Error(ErrorKind::InvalidArgument, "retagging must keep the boundary edge set");
  }
  Mesh out = *this;
  out.boundary_ = std::move(boundary);
  return out;
}

Mesh build_structured_mesh(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "mesh needs at least one subdivision");

  const int stride = n + 1;
  std::vector<Point> nodes;
  nodes.reserve(static_cast<std::size_t>(stride) * stride);
  // (2i - n) / n is exactly antisymmetric in i <-> n - i.
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      nodes.emplace_back(static_cast<double>(2 * i - n) / n, static_cast<double>(2 * j - n) / n);
    }
  }

  std::vector<Mesh::Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = j * stride + i;
      const int lr = ll + 1;
      const int ul = ll + stride;
      const int ur = ul + 1;
      tris.push_back({ll, lr, ur});
      tris.push_back({ll, ur, ul});
    }
  }

  // Counterclockwise walk: bottom, right, top, left.
  std::vector<BoundaryEdge> boundary;
  boundary.reserve(4 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) boundary.push_back({i, i + 1, BoundaryTag::Insulated});
  for (int j = 0; j < n; ++j) {
    boundary.push_back({j * stride + n, (j + 1) * stride + n, BoundaryTag::Insulated});
  }
  for (int i = n; i > 0; --i) {
    boundary.push_back({n * stride + i, n * stride + i - 1, BoundaryTag::Insulated});
  }
  for (int j = n; j > 0; --j) {
    boundary.push_back({j * stride, (j - 1) * stride, BoundaryTag::Insulated});
  }

  return Mesh::from_parts(std::move(nodes), std::move(tris), std::move(boundary));
}

Mesh tag_boundaries(const Mesh& mesh, double halfwidth) {
  if (!(halfwidth > 0.0 && halfwidth < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "electrode halfwidth must lie in (0, 1)");
  }
  const double w = halfwidth + kGeomTol;
  auto on = [](double v, double target) { return std::abs(v - target) <= kGeomTol; };

  std::vector<BoundaryEdge> edges = mesh.boundary_edges();
  std::array<int, 4> counts{};
  for (auto& e : edges) {
    const Point& p = mesh.node(e.a);
    const Point& q = mesh.node(e.b);
    e.tag = BoundaryTag::Insulated;
    if (on(p.x(), 1.0) && on(q.x(), 1.0) && std::abs(p.y()) <= w && std::abs(q.y()) <= w) {
      e.tag = BoundaryTag::E1Plus;
    } else if (on(p.x(), -1.0) && on(q.x(), -1.0) && std::abs(p.y()) <= w && std::abs(q.y()) <= w) {
      e.tag = BoundaryTag::E1Minus;
    } else if (on(p.y(), 1.0) && on(q.y(), 1.0) && std::abs(p.x()) <= w && std::abs(q.x()) <= w) {
      e.tag = BoundaryTag::E2Plus;
    } else if (on(p.y(), -1.0) && on(q.y(), -1.0) && std::abs(p.x()) <= w && std::abs(q.x()) <= w) {
      e.tag = BoundaryTag::E2Minus;
    }
    if (e.tag != BoundaryTag::Insulated) ++counts[static_cast<int>(e.tag)];
  }
  for (int k = 0; k < 4; ++k) {
    if (counts[k] == 0) {
      throw Error(ErrorKind::ElectrodeEmpty,
                  "no boundary edge qualifies for electrode " +
                      std::string(tag_name(static_cast<BoundaryTag>(k))));
    }
  }
  return mesh.with_tags(std::move(edges));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> nodes = mesh.nodes();
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(nodes.size()));
    if (inserted) nodes.push_back(0.5 * (mesh.node(a) + mesh.node(b)));
    return it->second;
  };

  std::vector<Mesh::Triangle> tris;
  tris.reserve(4 * mesh.triangles().size());
  for (const auto& t : mesh.triangles()) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    tris.push_back({t[0], m01, m20});
    tris.push_back({m01, t[1], m12});
    tris.push_back({m20, m12, t[2]});
    tris.push_back({m01, m12, m20});
  }

  std::vector<BoundaryEdge> boundary;
  boundary.reserve(2 * mesh.boundary_edges().size());
  for (const auto& e : mesh.boundary_edges()) {
    const int m = mid(e.a, e.b);
    boundary.push_back({e.a, m, e.tag});
    boundary.push_back({m, e.b, e.tag});
  }
  return Mesh::from_parts(std::move(nodes), std::move(tris), std::move(boundary));
}

RegionMasks region_masks(const Mesh& mesh, double r_inner, double r_contrast) {
  if (!(r_inner > 0.0 && r_inner < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "inner radius must lie in (0, 1)");
  }
  if (!(r_contrast > 0.0 && r_contrast <= r_inner)) {
    throw Error(ErrorKind::InvalidArgument, "contrast radius must lie in (0, r_inner]");
  }
  RegionMasks masks;
  masks.inner.resize(mesh.num_triangles());
  masks.contrast.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double r = mesh.centroid(t).norm();
    masks.inner[t] = r < r_inner;
    masks.contrast[t] = r < r_contrast;
  }
  return masks;
}

std::vector<int> masked_nodes(const Mesh& mesh, const std::vector<bool>& mask) {
  std::vector<bool> hit(mesh.num_nodes(), false);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (!mask[t]) continue;
    for (int v : mesh.triangle(t)) hit[v] = true;
  }
  std::vector<int> out;
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (hit[i]) out.push_back(i);
  }
  return out;
}

}  // namespace mreit

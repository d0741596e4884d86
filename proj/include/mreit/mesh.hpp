#pragma once

#include <Eigen/Core>

#include <array>
#include <string_view>
#include <vector>

namespace mreit {

using Point = Eigen::Vector2d;

enum class BoundaryTag { E1Plus, E1Minus, E2Plus, E2Minus, Insulated };

std::string_view tag_name(BoundaryTag tag);
BoundaryTag parse_tag(std::string_view name);

// Electrode pair index (1 or 2) and the tags of its two electrodes.
enum class Drive { First = 1, Second = 2 };

BoundaryTag positive_tag(Drive drive);
BoundaryTag negative_tag(Drive drive);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Insulated;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

// Triangulation of the square [-1,1]^2 with P1 geometry cached per triangle.
// Immutable once built; construct through build_structured_mesh or
// Mesh::from_parts (file input, refinement).
class Mesh {
 public:
  using Triangle = std::array<int, 3>;

  static Mesh from_parts(std::vector<Point> nodes, std::vector<Triangle> triangles,
                         std::vector<BoundaryEdge> boundary);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  const Point& node(int i) const { return nodes_[i]; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  double area(int t) const { return area_[t]; }
  Point centroid(int t) const;

  // Gradient of the P1 hat function of local vertex k on triangle t.
  const Point& shape_gradient(int t, int k) const { return grad_[t][k]; }

  // Sorted unique node indices lying on edges with the given tag.
  std::vector<int> tagged_nodes(BoundaryTag tag) const;
  // Sorted unique node indices on any boundary edge.
  std::vector<int> boundary_nodes() const;

  Mesh with_tags(std::vector<BoundaryEdge> boundary) const;

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.nodes_ == b.nodes_ && a.triangles_ == b.triangles_ && a.boundary_ == b.boundary_;
  }

 private:
  void compute_geometry();

  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<double> area_;
  std::vector<std::array<Point, 3>> grad_;
};

// Uniform (n+1)^2 grid on [-1,1]^2, each square split along its lower-left to
// upper-right diagonal. Boundary edges are tagged Insulated.
Mesh build_structured_mesh(int n);

// Retags boundary edges: an edge belongs to an electrode when both endpoints lie
// on the corresponding side with |offset| <= halfwidth (closed interval).
Mesh tag_boundaries(const Mesh& mesh, double halfwidth = 0.1);

// Splits every triangle into four through its edge midpoints. Child triangles
// 4t..4t+3 belong to parent t; boundary tags are inherited.
Mesh refine_uniform(const Mesh& mesh);

struct RegionMasks {
  std::vector<bool> inner;     // centroid inside Omega_I
  std::vector<bool> contrast;  // centroid inside Omega_c, used for metrics only
};

RegionMasks region_masks(const Mesh& mesh, double r_inner = 0.95, double r_contrast = 0.9);

// Nodes that are a vertex of at least one masked triangle.
std::vector<int> masked_nodes(const Mesh& mesh, const std::vector<bool>& mask);

}  // namespace mreit

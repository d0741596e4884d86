#include "mreit/errors.hpp"
#include "mreit/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace mreit;

TEST_SUITE("mesh") {

TEST_CASE("entity counts") {
  const Mesh m1 = build_structured_mesh(1);
  CHECK(m1.num_nodes() == 4);
  CHECK(m1.num_triangles() == 2);
  const Mesh m260 = build_structured_mesh(260);
  CHECK(m260.num_nodes() == 68121);
  CHECK(m260.num_triangles() == 135200);
  CHECK_THROWS_AS(build_structured_mesh(0), Error);
}

TEST_CASE("area and orientation") {
  for (int n : {1, 2, 5, 17}) {
    const Mesh m = build_structured_mesh(n);
    double total = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const auto& tri = m.triangle(t);
      const Point a = m.node(tri[1]) - m.node(tri[0]);
      const Point b = m.node(tri[2]) - m.node(tri[0]);
      const double cross = a.x() * b.y() - a.y() * b.x();
      CHECK(cross > 0.0);
      CHECK(m.area(t) == doctest::Approx(0.5 * cross).epsilon(1e-14));
      total += m.area(t);
    }
    CHECK(std::abs(total - 4.0) <= 1e-12);
  }
}

TEST_CASE("node coordinates are antisymmetric") {
  const int n = 7;
  const Mesh m = build_structured_mesh(n);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const Point& p = m.node(j * (n + 1) + i);
      const Point& q = m.node(j * (n + 1) + (n - i));
      CHECK(p.x() == -q.x());
      CHECK(p.y() == q.y());
    }
  }
}

TEST_CASE("shape gradients sum to zero and reproduce linears") {
  const Mesh m = build_structured_mesh(3);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Point s = m.shape_gradient(t, 0) + m.shape_gradient(t, 1) + m.shape_gradient(t, 2);
    CHECK(s.norm() <= 1e-13);
    Point gx = Point::Zero();
    for (int k = 0; k < 3; ++k) gx += m.node(m.triangle(t)[k]).x() * m.shape_gradient(t, k);
    CHECK((gx - Point(1, 0)).norm() <= 1e-13);
  }
}

TEST_CASE("boundary tiles the square counterclockwise") {
  const int n = 6;
  const Mesh m = build_structured_mesh(n);
  REQUIRE(m.boundary_edges().size() == 4u * n);
  double perimeter = 0.0;
  for (std::size_t k = 0; k < m.boundary_edges().size(); ++k) {
    const auto& e = m.boundary_edges()[k];
    const auto& next = m.boundary_edges()[(k + 1) % m.boundary_edges().size()];
    CHECK(e.b == next.a);
    perimeter += (m.node(e.b) - m.node(e.a)).norm();
  }
  CHECK(perimeter == doctest::Approx(8.0));
}

TEST_CASE("electrode tagging") {
  const Mesh m = tag_boundaries(build_structured_mesh(260));
  int counts[5] = {};
  for (const auto& e : m.boundary_edges()) ++counts[static_cast<int>(e.tag)];
  for (int k = 0; k < 4; ++k) CHECK(counts[k] == 26);
  CHECK(counts[4] == 4 * 260 - 4 * 26);

  const int s = 261;
  const int node_1_0 = 130 * s + 260;
  const auto plus = m.tagged_nodes(BoundaryTag::E1Plus);
  CHECK(std::binary_search(plus.begin(), plus.end(), node_1_0));
  const int corner = 260 * s + 260;
  for (auto tag : {BoundaryTag::E1Plus, BoundaryTag::E1Minus, BoundaryTag::E2Plus, BoundaryTag::E2Minus}) {
    const auto nodes = m.tagged_nodes(tag);
    CHECK_FALSE(std::binary_search(nodes.begin(), nodes.end(), corner));
    CHECK(nodes.size() == 27u);
  }
  for (int v : plus) {
    CHECK(m.node(v).x() == 1.0);
    CHECK(std::abs(m.node(v).y()) <= 0.1 + 1e-12);
  }
}

TEST_CASE("tagging errors") {
  const Mesh coarse = build_structured_mesh(8);
  try {
    tag_boundaries(coarse, 0.1);
    FAIL("expected ElectrodeEmpty");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ElectrodeEmpty);
  }
  CHECK_THROWS_AS(tag_boundaries(coarse, 0.0), Error);
  CHECK_THROWS_AS(tag_boundaries(coarse, 1.0), Error);
  CHECK_NOTHROW(tag_boundaries(coarse, 0.25));
}

TEST_CASE("tags round-trip through names") {
  for (auto tag : {BoundaryTag::E1Plus, BoundaryTag::E1Minus, BoundaryTag::E2Plus, BoundaryTag::E2Minus,
                   BoundaryTag::Insulated}) {
    CHECK(parse_tag(tag_name(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_tag("E3plus"), Error);
}

TEST_CASE("region masks on the n=2 mesh") {
  const Mesh m = build_structured_mesh(2);
  const RegionMasks masks = region_masks(m, 0.95, 0.9);
  int inner = 0;
  // Centroids of the two triangles in the unit square with lower-left corner (a, b).
  for (double b : {-1.0, 0.0}) {
    for (double a : {-1.0, 0.0}) {
      for (Point c : {Point(a + 2.0 / 3, b + 1.0 / 3), Point(a + 1.0 / 3, b + 2.0 / 3)}) {
        if (c.norm() < 0.95) ++inner;
      }
    }
  }
  int got = 0;
  for (bool v : masks.inner) got += v;
  CHECK(got == inner);
  CHECK(got == 8);
}

TEST_CASE("region mask membership by centroid") {
  const Mesh m = build_structured_mesh(50);
  const RegionMasks masks = region_masks(m, 0.95, 0.5);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double r = m.centroid(t).norm();
    CHECK(masks.inner[t] == (r < 0.95));
    CHECK(masks.contrast[t] == (r < 0.5));
  }
  CHECK_THROWS_AS(region_masks(m, 1.0, 0.5), Error);
  CHECK_THROWS_AS(region_masks(m, 0.5, 0.6), Error);
}

TEST_CASE("uniform refinement") {
  const Mesh coarse = tag_boundaries(build_structured_mesh(4), 0.5);
  const Mesh fine = refine_uniform(coarse);
  CHECK(fine.num_triangles() == 4 * coarse.num_triangles());
  CHECK(fine.num_nodes() == 81);
  for (int t = 0; t < coarse.num_triangles(); ++t) {
    double area = 0.0;
    Point c = Point::Zero();
    for (int k = 0; k < 4; ++k) {
      area += fine.area(4 * t + k);
      c += fine.area(4 * t + k) * fine.centroid(4 * t + k);
    }
    CHECK(area == doctest::Approx(coarse.area(t)).epsilon(1e-14));
    CHECK((c / area - coarse.centroid(t)).norm() <= 1e-14);
  }
  for (auto tag : {BoundaryTag::E1Plus, BoundaryTag::E2Minus}) {
    double len_c = 0.0, len_f = 0.0;
    for (const auto& e : coarse.boundary_edges()) {
      if (e.tag == tag) len_c += (coarse.node(e.a) - coarse.node(e.b)).norm();
    }
    for (const auto& e : fine.boundary_edges()) {
      if (e.tag == tag) len_f += (fine.node(e.a) - fine.node(e.b)).norm();
    }
    CHECK(len_f == doctest::Approx(len_c));
  }
}

TEST_CASE("from_parts validation") {
  const Mesh m = build_structured_mesh(1);
  auto nodes = m.nodes();
  auto tris = m.triangles();
  auto bnd = m.boundary_edges();
  CHECK(Mesh::from_parts(nodes, tris, bnd) == m);
  auto flipped = tris;
  std::swap(flipped[0][1], flipped[0][2]);
  CHECK_THROWS_AS(Mesh::from_parts(nodes, flipped, bnd), Error);
  auto short_bnd = bnd;
  short_bnd.pop_back();
  CHECK_THROWS_AS(Mesh::from_parts(nodes, tris, short_bnd), Error);
  auto bad = tris;
  bad[1][0] = 9;
  CHECK_THROWS_AS(Mesh::from_parts(nodes, bad, bnd), Error);
}

TEST_CASE("masked nodes") {
  const Mesh m = build_structured_mesh(1);
  const auto nodes = masked_nodes(m, {true, false});
  CHECK(nodes == std::vector<int>{0, 1, 3});
}

}

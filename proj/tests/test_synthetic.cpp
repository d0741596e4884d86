#include "mreit/errors.hpp"
#include "mreit/forward.hpp"
#include "mreit/phantom.hpp"
#include "mreit/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace mreit;

TEST_SUITE("synthetic") {

TEST_CASE("Shepp-Logan values") {
  // Outer ellipse 2, brain -0.98, background offset 1.
  CHECK(1.0 + shepp_logan_value(0.0, 0.0) == doctest::Approx(2.02));
  CHECK(shepp_logan_value(0.0, 0.95) == 0.0);
  CHECK(shepp_logan_value(0.0, 0.9) == doctest::Approx(2.0));
  const PixelPhantom p = shepp_logan(260, 260);
  CHECK(p.min() == doctest::Approx(1.0));
  CHECK(p.max() == doctest::Approx(3.0));
  CHECK(p.at(0, 0) == 1.0);
  // Pixel centres: (129.5 - 130) spacing puts pixel 130 just right of the origin.
  CHECK(p.at(130, 130) == doctest::Approx(2.02));
}

TEST_CASE("smooth bumps stay in range and inside the inner disk") {
  const PixelPhantom p = smooth_bumps(200, 200);
  CHECK(p.min() >= 1.0);
  CHECK(p.max() <= 1.3);
  CHECK(p.max() > 1.29);
  for (int j = 0; j < 200; ++j) {
    for (int i = 0; i < 200; ++i) {
      const double x = -1.0 + (2.0 * i + 1.0) / 200, y = -1.0 + (2.0 * j + 1.0) / 200;
      if (std::hypot(x, y) >= 0.8) CHECK(p.at(i, j) == 1.0);
    }
  }
}

TEST_CASE("pixel sampling") {
  const Mesh m = build_structured_mesh(4);
  PixelPhantom p = constant_phantom(4, 4, 2.5);
  CHECK((pixels_to_nodal(p, m).array() == 2.5).all());
  // Nodes at interior pixel corners average the four neighbouring pixels.
  for (int k = 0; k < 16; ++k) p.values[k] = k;
  const NodalField f = pixels_to_nodal(p, m);
  CHECK(f[1 * 5 + 1] == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
  CHECK(f[0] == doctest::Approx(0.0));       // clamped corner
  CHECK(f[24] == doctest::Approx(15.0));
  // A linear image is reproduced exactly away from the border.
  PixelPhantom lin{8, 8, std::vector<double>(64)};
  for (int j = 0; j < 8; ++j) {
    for (int i = 0; i < 8; ++i) lin.values[j * 8 + i] = 2.0 * (-1.0 + (2.0 * i + 1.0) / 8) + 1.0;
  }
  const Mesh m8 = build_structured_mesh(8);
  const NodalField g = pixels_to_nodal(lin, m8);
  for (int k = 0; k < m8.num_nodes(); ++k) {
    const Point& q = m8.node(k);
    if (std::abs(q.x()) < 0.8) CHECK(g[k] == doctest::Approx(2.0 * q.x() + 1.0));
  }
}

TEST_CASE("constant conductivity gives exactly zero data") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  for (GradientRule rule : {GradientRule::LogConsistent, GradientRule::Linear}) {
    SynthOptions o;
    o.rule = rule;
    const LaplacianBzData d = synthesize_laplacian_bz(m, NodalField::Constant(m.num_nodes(), 1.37), o);
    CHECK(d.lap1.isZero(0.0));
    CHECK(d.lap2.isZero(0.0));
  }
  const LaplacianBzData r = synthesize_refined(m, constant_phantom(20, 20, 2.0), 1);
  CHECK(r.num_triangles() == m.num_triangles());
  CHECK(r.lap1.isZero(0.0));
}

TEST_CASE("data identity for a smooth conductivity") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const NodalField sigma = pixels_to_nodal(smooth_bumps(64, 64), m);
  SynthOptions lin;
  lin.rule = GradientRule::Linear;
  lin.mu0 = 2.0;
  const LaplacianBzData d = synthesize_laplacian_bz(m, sigma, lin);
  const NodalField u1 = solve_forward(m, sigma, {Drive::First});
  const TriVec2 gs = element_gradients(m, sigma);
  const TriVec2 gu = element_gradients(m, u1);
  for (int t = 0; t < m.num_triangles(); t += 37) {
    CHECK(d.lap1[t] == doctest::Approx(2.0 * (gs[t].x() * gu[t].y() - gs[t].y() * gu[t].x())));
  }
  // The two gradient rules agree to first order on smooth fields.
  const TriVec2 a = conductivity_gradients(m, sigma, GradientRule::Linear);
  const TriVec2 b = conductivity_gradients(m, sigma, GradientRule::LogConsistent);
  double worst = 0.0, scale = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    worst = std::max(worst, (a[t] - b[t]).norm());
    scale = std::max(scale, a[t].norm());
  }
  CHECK(worst <= 0.05 * scale);
}

TEST_CASE("refinement aggregation") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const Mesh fine = refine_uniform(m);
  TriField v(fine.num_triangles());
  for (int t = 0; t < fine.num_triangles(); ++t) v[t] = fine.centroid(t).x();
  const TriField agg = aggregate_children(fine, v, 1);
  for (int c = 0; c < m.num_triangles(); ++c) CHECK(agg[c] == doctest::Approx(m.centroid(c).x()).epsilon(1e-12));
  CHECK_THROWS_AS(aggregate_children(fine, TriField(v.head(10)), 1), Error);
  CHECK_THROWS_AS(aggregate_children(m, TriField(m.num_triangles()), 3), Error);

  const PixelPhantom p = smooth_bumps(40, 40);
  const LaplacianBzData same = synthesize_refined(m, p, 0);
  const LaplacianBzData direct = synthesize_laplacian_bz(m, pixels_to_nodal(p, m));
  CHECK(same.lap1 == direct.lap1);
  CHECK(same.lap2 == direct.lap2);
  CHECK_THROWS_AS(synthesize_refined(m, p, -1), Error);
}

TEST_CASE("noise") {
  LaplacianBzData d;
  d.lap1 = TriField::LinSpaced(1000, -1.0, 1.0);
  d.lap2 = TriField::Zero(1000);
  d.lap2[0] = 4.0;

  const LaplacianBzData a = add_relative_noise(d, 0.1, 99);
  const LaplacianBzData b = add_relative_noise(d, 0.1, 99);
  CHECK(a.lap1 == b.lap1);
  CHECK(a.lap2 == b.lap2);
  CHECK(a.noise_level == 0.1);
  CHECK(a.seed == std::optional<std::uint64_t>(99));
  CHECK(add_relative_noise(d, 0.1, 100).lap1 != a.lap1);

  for (Eigen::Index t = 0; t < 1000; ++t) {
    const double g1 = counter_normal(99, 1, static_cast<std::uint64_t>(t));
    CHECK(a.lap1[t] == doctest::Approx(d.lap1[t] + 0.1 * std::abs(d.lap1[t]) * g1));
    // Zero entries use the channel's mean magnitude (4 / 1000).
    if (t > 0) {
      const double g2 = counter_normal(99, 2, static_cast<std::uint64_t>(t));
      CHECK(a.lap2[t] == doctest::Approx(0.1 * 0.004 * g2));
    }
  }
  const LaplacianBzData none = add_relative_noise(d, 0.0, 5);
  CHECK(none.lap1 == d.lap1);
  CHECK_THROWS_AS(add_relative_noise(d, -0.1, 5), Error);
}

TEST_CASE("counter normal statistics") {
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double g = counter_normal(1, 1, static_cast<std::uint64_t>(i));
    CHECK(std::isfinite(g));
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.015);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK(counter_normal(1, 1, 5) == counter_normal(1, 1, 5));
  CHECK(counter_normal(1, 1, 5) != counter_normal(1, 2, 5));
}

}

#include "mreit/errors.hpp"
#include "mreit/forward.hpp"
#include "mreit/harmonic_bz.hpp"
#include "mreit/metrics.hpp"
#include "mreit/phantom.hpp"

#include <doctest.h>

#include <cmath>

using namespace mreit;

namespace {

struct Fixture {
  Mesh mesh = tag_boundaries(build_structured_mesh(32));
  RegionMasks masks = region_masks(mesh);
  NodalField sigma_star = pixels_to_nodal(smooth_bumps(128, 128), mesh);
};

}  // namespace

TEST_SUITE("harmonic_bz") {

TEST_CASE("A rows are rotated gradients") {
  const TriVec2 g1{Eigen::Vector2d(1.0, 2.0)}, g2{Eigen::Vector2d(-3.0, 0.5)};
  const TriMat2 a = assemble_A(g1, g2);
  Eigen::Matrix2d expected;
  expected << 2.0, -1.0, 0.5, 3.0;
  CHECK(a[0] == expected);
  CHECK_THROWS_AS(assemble_A(g1, TriVec2{}), Error);
}

TEST_CASE("vector field inverts the data identity") {
  Fixture f;
  const SparseMatrix k = assemble_stiffness(f.mesh, f.sigma_star);
  const NodalField u1 = solve_forward(f.mesh, k, f.sigma_star, {Drive::First});
  const NodalField u2 = solve_forward(f.mesh, k, f.sigma_star, {Drive::Second});
  SynthOptions so;
  so.mu0 = 0.5;
  const LaplacianBzData data = laplacian_bz_from_solutions(f.mesh, f.sigma_star, u1, u2, so);
  const TriMat2 a = assemble_A(element_gradients(f.mesh, u1), element_gradients(f.mesh, u2));
  BzConfig cfg;
  cfg.mu0 = 0.5;
  const TriVec2 v = vector_field(f.mesh, f.sigma_star, a, data, f.masks, cfg);
  const TriVec2 glog = element_gradients(f.mesh, f.sigma_star.array().log().matrix());
  for (int t = 0; t < f.mesh.num_triangles(); ++t) {
    if (f.masks.inner[t]) {
      CHECK((v[t] - glog[t]).cwiseAbs().maxCoeff() <= 1e-12);
    } else {
      CHECK(v[t].isZero(0.0));
    }
  }
}

TEST_CASE("determinant guard") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const RegionMasks masks = region_masks(m);
  // Parallel gradients make every A singular.
  const TriVec2 g(m.num_triangles(), Eigen::Vector2d(1.0, 0.0));
  const TriMat2 a = assemble_A(g, g);
  LaplacianBzData data{TriField::Ones(m.num_triangles()), TriField::Ones(m.num_triangles()), 0.0, {}};
  BzConfig cfg;
  try {
    vector_field(m, NodalField::Ones(m.num_nodes()), a, data, masks, cfg);
    FAIL("expected SingularCoefficientMatrix");
  } catch (const SingularCoefficientMatrix& e) {
    CHECK(e.kind() == ErrorKind::SingularCoefficientMatrix);
    CHECK(masks.inner[e.triangle()]);
    CHECK(e.det() == 0.0);
  }
  cfg.det_guard = DetGuard::ZeroOut;
  for (const auto& v : vector_field(m, NodalField::Ones(m.num_nodes()), a, data, masks, cfg)) CHECK(v.isZero(0.0));

  // Nearly parallel rows trip the relative floor.
  TriVec2 g2(m.num_triangles(), Eigen::Vector2d(1.0, 1e-14));
  cfg.det_guard = DetGuard::Error;
  CHECK_THROWS_AS(vector_field(m, NodalField::Ones(m.num_nodes()), assemble_A(g, g2), data, masks, cfg),
                  SingularCoefficientMatrix);
  CHECK_THROWS_AS(vector_field(m, NodalField::Ones(m.num_nodes()), a, LaplacianBzData{}, masks, cfg), Error);
}

TEST_CASE("log conductivity solve recovers a zero-trace potential") {
  const Mesh m = build_structured_mesh(24);
  NodalField w(m.num_nodes());
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Point& p = m.node(i);
    w[i] = (1 - p.x() * p.x()) * (1 - p.y() * p.y()) * std::sin(2 * p.x() + p.y());
  }
  const LogConductivitySolver solver(m, 1.0);
  CHECK(max_norm(solver.solve(element_gradients(m, w)) - w) <= 1e-9);

  const LogConductivitySolver shifted(m, 2.0);
  const NodalField z = shifted.solve(TriVec2(m.num_triangles(), Eigen::Vector2d::Zero()));
  CHECK((z.array() - std::log(2.0)).abs().maxCoeff() <= 1e-9);
  CHECK(max_norm(update_log_sigma(m, element_gradients(m, w), BzConfig{}) - w) <= 1e-9);
  CHECK_THROWS_AS(LogConductivitySolver(m, 0.0), Error);
}

TEST_CASE("zero data terminates after one update") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const LaplacianBzData data{TriField::Zero(m.num_triangles()), TriField::Zero(m.num_triangles()), 0.0, {}};
  BzConfig cfg;
  cfg.sigma_b = 1.5;
  const ReconstructionResult r = reconstruct_bz(m, region_masks(m), data, cfg);
  CHECK(r.iterations == 1);
  CHECK(r.forward_solves == 2);
  CHECK(r.status == RunStatus::Converged);
  CHECK((r.sigma.array() - 1.5).abs().maxCoeff() <= 1e-9);
  CHECK(r.diff_history.size() == 1);
}

TEST_CASE("smooth reconstruction converges with contracting differences") {
  Fixture f;
  const LaplacianBzData data = synthesize_laplacian_bz(f.mesh, f.sigma_star);
  const ReconstructionResult r = reconstruct_bz(f.mesh, f.masks, data);
  CHECK(r.status == RunStatus::Converged);
  CHECK(r.iterations <= 20);
  CHECK(r.forward_solves == 2 * r.iterations);
  CHECK(r.final_diff < 1e-6);
  CHECK(r.diff_history.back() == r.final_diff);
  for (std::size_t i = 1; i < 4; ++i) CHECK(r.diff_history[i] < r.diff_history[i - 1]);
  CHECK(relative_error(f.sigma_star, r.sigma) <= 1e-6);
  CHECK(max_norm(r.log_sigma - r.sigma.array().log().matrix()) <= 1e-15);

  SUBCASE("two threads give identical iterates") {
    BzConfig cfg;
    cfg.threads = 2;
    const ReconstructionResult p = reconstruct_bz(f.mesh, f.masks, data, cfg);
    CHECK(p.sigma == r.sigma);
    CHECK(p.diff_history == r.diff_history);
  }
  SUBCASE("iteration cap") {
    BzConfig cfg;
    cfg.max_iterations = 2;
    const ReconstructionResult p = reconstruct_bz(f.mesh, f.masks, data, cfg);
    CHECK(p.status == RunStatus::MaxIterations);
    CHECK(p.iterations == 2);
  }
  SUBCASE("starting at the truth is a fixed point") {
    const ReconstructionResult p = reconstruct_bz(f.mesh, f.masks, data, f.sigma_star, BzConfig{});
    CHECK(p.iterations == 1);
    CHECK(max_norm(p.log_sigma - f.sigma_star.array().log().matrix()) <= 1e-8);
  }
}

TEST_CASE("invalid configuration") {
  Fixture f;
  const LaplacianBzData data{TriField::Zero(3), TriField::Zero(3), 0.0, {}};
  CHECK_THROWS_AS(reconstruct_bz(f.mesh, f.masks, data), Error);
  BzConfig cfg;
  cfg.epsilon = 0.0;
  const LaplacianBzData ok{TriField::Zero(f.mesh.num_triangles()), TriField::Zero(f.mesh.num_triangles()), 0.0, {}};
  CHECK_THROWS_AS(reconstruct_bz(f.mesh, f.masks, ok, cfg), Error);
  CHECK(status_name(RunStatus::Converged) == "converged");
}

}

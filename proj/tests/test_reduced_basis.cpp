#include "mreit/errors.hpp"
#include "mreit/forward.hpp"
#include "mreit/reduced_basis.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace mreit;

namespace {

NodalField random_sigma(const Mesh& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.5, 2.0);
  NodalField s(m.num_nodes());
  for (auto& v : s) v = d(rng);
  return s;
}

}  // namespace

TEST_SUITE("reduced_basis") {

TEST_CASE("lifting and basis structure") {
  std::mt19937_64 rng(1);
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  ReducedSpace s = init_space(m, Drive::First);
  CHECK(s.dimension() == 0);
  CHECK(s.lifting() == solve_forward(m, NodalField::Ones(m.num_nodes()), {Drive::First}));
  for (int k = 0; k < 4; ++k) CHECK(s.enrich(m, solve_forward(m, random_sigma(m, rng), {Drive::First})));
  REQUIRE(s.dimension() == 4);
  for (int i = 0; i < 4; ++i) {
    for (int v : s.dirichlet_nodes()) CHECK(s.basis()[i][v] == 0.0);
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(h1_inner(m, s.basis()[i], s.basis()[j]) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  }
  // Re-adding a snapshot already in the span is dropped.
  const NodalField dup = s.lifting() + 0.3 * s.basis()[0] - 0.1 * s.basis()[2];
  CHECK_FALSE(s.enrich(m, dup));
  CHECK(s.dimension() == 4);
  // A snapshot equal to the lifting contributes nothing either.
  CHECK_FALSE(s.enrich(m, s.lifting()));

  const ReducedSpace copy = enrich(s, m, solve_forward(m, random_sigma(m, rng), {Drive::First}));
  CHECK(copy.dimension() == 5);
  CHECK(s.dimension() == 4);
}

TEST_CASE("trace mismatch") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  ReducedSpace s = ReducedSpace::init(m, Drive::Second);
  const NodalField wrong = solve_forward(m, NodalField::Ones(m.num_nodes()), {Drive::First});
  try {
    s.enrich(m, wrong);
    FAIL("expected TraceMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TraceMismatch);
  }
  CHECK_THROWS_AS(s.enrich(m, NodalField::Ones(4)), Error);
}

TEST_CASE("from_parts validation") {
  std::mt19937_64 rng(2);
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  ReducedSpace s = ReducedSpace::init(m, Drive::First);
  s.enrich(m, solve_forward(m, random_sigma(m, rng), {Drive::First}));
  s.enrich(m, solve_forward(m, random_sigma(m, rng), {Drive::First}));
  const ReducedSpace back = ReducedSpace::from_parts(m, Drive::First, s.lifting(), s.basis());
  CHECK(back.basis() == s.basis());
  auto scaled = s.basis();
  scaled[1] *= 1.01;
  CHECK_THROWS_AS(ReducedSpace::from_parts(m, Drive::First, s.lifting(), scaled), Error);
  CHECK_THROWS_AS(ReducedSpace::from_parts(m, Drive::Second, s.lifting(), s.basis()), Error);
}

TEST_CASE("reproduction of snapshots") {
  std::mt19937_64 rng(3);
  const Mesh m = tag_boundaries(build_structured_mesh(24));
  for (Drive d : {Drive::First, Drive::Second}) {
    ReducedSpace s = ReducedSpace::init(m, d);
    std::vector<NodalField> sigmas, snaps;
    for (int k = 0; k < 3; ++k) {
      sigmas.push_back(random_sigma(m, rng));
      snaps.push_back(solve_forward(m, sigmas.back(), {d}));
      s.enrich(m, snaps.back());
    }
    for (int k = 0; k < 3; ++k) {
      const ReducedSolution r = solve_reduced(s, m, sigmas[k]);
      CHECK(h1_norm(m, r.u - snaps[k]) <= 1e-10);
      CHECK(r.condition >= 1.0);
      CHECK(r.coefficients.size() == 3);
    }
    // N = 0 returns the lifting.
    const ReducedSolution z = solve_reduced(ReducedSpace::init(m, d), m, sigmas[0]);
    CHECK(z.u == ReducedSpace::init(m, d).lifting());
  }
}

TEST_CASE("galerkin orthogonality of the reduced solution") {
  std::mt19937_64 rng(4);
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  ReducedSpace s = ReducedSpace::init(m, Drive::First);
  for (int k = 0; k < 3; ++k) s.enrich(m, solve_forward(m, random_sigma(m, rng), {Drive::First}));
  const NodalField sigma = random_sigma(m, rng);
  const SparseMatrix k = assemble_stiffness(m, sigma);
  const ReducedSolution r = solve_reduced(s, k);
  const Eigen::VectorXd ku = k * r.u;
  for (const auto& psi : s.basis()) CHECK(std::abs(psi.dot(ku)) <= 1e-12 * ku.norm());
  // Minimal energy error among space members.
  const NodalField truth = solve_forward(m, k, sigma, {Drive::First}, {1e-13, 0});
  auto energy = [&](const NodalField& e) { return e.dot(k * e); };
  const double best = energy(truth - r.u);
  CHECK(best <= energy(truth - (r.u + 1e-3 * s.basis()[1])));
  CHECK(best <= energy(truth - s.lifting()));
}

TEST_CASE("coercivity bound against a dense generalized eigensolve") {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  for (Drive d : {Drive::First, Drive::Second}) {
    const EstimatorContext ctx = make_estimator_context(m, d);
    const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_stiffness(m, NodalField::Ones(m.num_nodes())));
    const Eigen::MatrixXd g = Eigen::MatrixXd(assemble_h1_gram(m));
    const int nf = static_cast<int>(ctx.free_nodes.size());
    Eigen::MatrixXd kf(nf, nf), gf(nf, nf);
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nf; ++j) {
        kf(i, j) = k(ctx.free_nodes[i], ctx.free_nodes[j]);
        gf(i, j) = g(ctx.free_nodes[i], ctx.free_nodes[j]);
      }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(kf, gf);
    const double lmin = eig.eigenvalues().minCoeff();
    CHECK(ctx.lambda_min <= lmin);
    CHECK(ctx.lambda_min >= lmin * (1 - 1e-4));
    CHECK(ctx.rayleigh == doctest::Approx(lmin).epsilon(1e-8));
    CHECK(ctx.alpha(NodalField::Constant(m.num_nodes(), 2.0)) == doctest::Approx(2.0 * ctx.lambda_min));
  }
  CHECK_THROWS_AS(make_estimator_context(build_structured_mesh(20), Drive::First), Error);
}

TEST_CASE("estimator bounds the true error") {
  std::mt19937_64 rng(5);
  const Mesh m = tag_boundaries(build_structured_mesh(24));
  for (Drive d : {Drive::First, Drive::Second}) {
    const EstimatorContext ctx = make_estimator_context(m, d);
    ReducedSpace s = ReducedSpace::init(m, d);
    for (int k = 0; k < 2; ++k) s.enrich(m, solve_forward(m, random_sigma(m, rng), {d}));
    for (int trial = 0; trial < 5; ++trial) {
      const NodalField sigma = random_sigma(m, rng);
      const NodalField truth = solve_forward(m, sigma, {d}, {1e-13, 0});
      const NodalField un = solve_reduced(s, m, sigma).u;
      const double err = h1_norm(m, truth - un);
      const double delta = error_estimate(s, ctx, m, sigma, un);
      CHECK(delta >= err);
      CHECK(delta <= 1e4 * err);
    }
    // The estimator vanishes on the exact solution.
    const NodalField sigma = random_sigma(m, rng);
    CHECK(error_estimate(s, ctx, m, sigma, solve_forward(m, sigma, {d}, {1e-13, 0})) <= 1e-9);
  }
  const EstimatorContext c1 = make_estimator_context(m, Drive::First);
  const ReducedSpace s2 = ReducedSpace::init(m, Drive::Second);
  CHECK_THROWS_AS(error_estimate(s2, c1, m, NodalField::Ones(m.num_nodes()), s2.lifting()), Error);
}

}

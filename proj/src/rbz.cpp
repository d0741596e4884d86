#include "mreit/rbz.hpp"

#include "mreit/errors.hpp"
#include "mreit/forward.hpp"
#include "mreit/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <string>

namespace mreit {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename F>
auto both_drives(int threads, F&& f) {
  if (threads > 1) {
    auto first = std::async(std::launch::async, [&] { return f(Drive::First); });
    auto second = f(Drive::Second);
    return std::pair{first.get(), std::move(second)};
  }
  auto first = f(Drive::First);
  return std::pair{std::move(first), f(Drive::Second)};
}

}  // namespace

std::string_view trust_name(TrustCriterion c) {
  return c == TrustCriterion::MinEstimator ? "min" : "max";
}

TrustCriterion parse_trust(std::string_view name) {
  if (name == "min") return TrustCriterion::MinEstimator;
  if (name == "max") return TrustCriterion::MaxEstimator;
  throw Error(ErrorKind::InvalidArgument, "trust criterion must be 'min' or 'max'");
}

RbzResult reconstruct_rbz(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                          const RbzConfig& cfg) {
  const auto t0 = Clock::now();
  const EstimatorContext ctx1 = make_estimator_context(mesh, Drive::First);
  const EstimatorContext ctx2 = make_estimator_context(mesh, Drive::Second);
  const double context_ms = elapsed_ms(t0);
  RbzResult res = reconstruct_rbz(mesh, masks, data, ctx1, ctx2, cfg);
  res.phases.setup_ms += context_ms;
  res.wall_ms += context_ms;
  return res;
}

RbzResult reconstruct_rbz(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                          const EstimatorContext& ctx1, const EstimatorContext& ctx2,
                          const RbzConfig& cfg) {
  if (data.num_triangles() != mesh.num_triangles() || data.lap2.size() != data.lap1.size()) {
    throw Error(ErrorKind::MeshMismatch, "Bz data does not match mesh triangle count");
  }
  if (!(cfg.epsilon > 0.0) || !(cfg.epsilon2 >= 0.0) || cfg.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "invalid RBZ configuration");
  }
  if (ctx1.drive != Drive::First || ctx2.drive != Drive::Second) {
    throw Error(ErrorKind::InvalidArgument, "estimator contexts must be ordered by drive");
  }

  const auto start = Clock::now();
  RbzResult res;
  auto t = Clock::now();
  const StiffnessAssembler assembler(mesh);
  const LogConductivitySolver poisson(mesh, cfg.sigma_b, cfg.solve);
  res.phases.setup_ms = elapsed_ms(t);

  res.sigma = NodalField::Constant(mesh.num_nodes(), cfg.sigma_b);
  res.log_sigma = res.sigma.array().log().matrix();
  res.status = RunStatus::MaxIterations;

  std::optional<ReducedSpace> space1, space2;
  auto estimate = [&](const SparseMatrix& k, const ReducedSolution& r1, const ReducedSolution& r2) {
    const auto te = Clock::now();
    const double d1 = error_estimate(ctx1, k, res.sigma, r1.u);
    const double d2 = error_estimate(ctx2, k, res.sigma, r2.u);
    res.phases.estimator_ms += elapsed_ms(te);
    return std::pair{d1, d2};
  };
  auto reduced = [&](const SparseMatrix& k) {
    const auto tr = Clock::now();
    auto out = std::pair{solve_reduced(*space1, k), solve_reduced(*space2, k)};
    res.phases.reduced_solve_ms += elapsed_ms(tr);
    return out;
  };

  t = Clock::now();
  SparseMatrix k = assembler.assemble(res.sigma);
  res.phases.assembly_ms += elapsed_ms(t);

  bool done = false;
  while (!done && res.iterations < cfg.max_iterations) {
    // Outer step: full solves at the current iterate.
    t = Clock::now();
    auto [s1, s2] = both_drives(cfg.threads, [&](Drive d) {
      return solve_forward(mesh, k, res.sigma, {d}, cfg.solve);
    });
    res.forward_solves += 2;
    res.phases.full_solve_ms += elapsed_ms(t);
    if (!space1) {
      space1 = ReducedSpace::from_parts(mesh, Drive::First, s1, {});
      space2 = ReducedSpace::from_parts(mesh, Drive::Second, s2, {});
    }
    space1->enrich(mesh, s1, cfg.drop_tol);
    space2->enrich(mesh, s2, cfg.drop_tol);
    ++res.basis_updates;
    res.enrichment_iterations.push_back(res.iterations);

    auto [r1, r2] = reduced(k);
    {
      auto [d1, d2] = estimate(k, r1, r2);
      res.estimator_log.push_back({res.iterations, d1, d2, true});
    }

    // Inner loop on the projected iteration.
    while (true) {
      t = Clock::now();
      NodalField next = harmonic_update(mesh, masks, data, res.sigma, r1.u, r2.u, poisson, cfg);
      res.phases.poisson_ms += elapsed_ms(t);

      const double diff = max_norm(next - res.log_sigma);
      res.log_sigma = std::move(next);
      res.sigma = res.log_sigma.array().exp().matrix();
      res.diff_history.push_back(diff);
      res.final_diff = diff;
      ++res.iterations;
      if (diff < cfg.epsilon) {
        res.status = RunStatus::Converged;
        done = true;
        break;
      }
      if (res.iterations >= cfg.max_iterations) break;

      t = Clock::now();
      k = assembler.assemble(res.sigma);
      res.phases.assembly_ms += elapsed_ms(t);
      std::tie(r1, r2) = reduced(k);
      auto [d1, d2] = estimate(k, r1, r2);
      res.estimator_log.push_back({res.iterations, d1, d2, false});
      const double stat = cfg.trust == TrustCriterion::MinEstimator ? std::min(d1, d2) : std::max(d1, d2);
      if (stat > cfg.epsilon2) break;
    }
  }

  res.n1 = space1 ? space1->dimension() : 0;
  res.n2 = space2 ? space2->dimension() : 0;
  res.wall_ms = elapsed_ms(start);
  return res;
}

MetricsReport compare_runs(const ReconstructionResult& bz, const RbzResult& rbz,
                           const std::optional<NodalField>& sigma_star) {
  if (bz.sigma.size() != rbz.sigma.size()) {
    throw Error(ErrorKind::MeshMismatch, "results live on different meshes");
  }
  MetricsReport m;
  m.rbz_vs_bz = relative_error(rbz.sigma, bz.sigma);
  if (sigma_star) {
    if (sigma_star->size() != bz.sigma.size()) {
      throw Error(ErrorKind::MeshMismatch, "reference conductivity lives on another mesh");
    }
    m.has_star = true;
    m.bz_vs_star = relative_error(*sigma_star, bz.sigma);
    m.rbz_vs_star = relative_error(*sigma_star, rbz.sigma);
  }
  m.bz_iterations = bz.iterations;
  m.rbz_iterations = rbz.iterations;
  m.bz_full_solves = bz.forward_solves;
  m.rbz_full_solves = rbz.forward_solves;
  m.rbz_basis_updates = rbz.basis_updates;
  m.bz_wall_ms = bz.wall_ms;
  m.rbz_wall_ms = rbz.wall_ms;
  m.speedup_percent = speedup_percent(bz.wall_ms, rbz.wall_ms);
  return m;
}

}  // namespace mreit

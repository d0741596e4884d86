#pragma once

#include "mreit/harmonic_bz.hpp"
#include "mreit/reduced_basis.hpp"

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace mreit {

// Which estimator statistic must exceed epsilon2 to distrust the reduced spaces.
enum class TrustCriterion { MinEstimator, MaxEstimator };

std::string_view trust_name(TrustCriterion c);
TrustCriterion parse_trust(std::string_view name);

// BzConfig::epsilon is the global acceptance tolerance epsilon1.
struct RbzConfig : BzConfig {
  double epsilon2 = 1e-3;
  TrustCriterion trust = TrustCriterion::MinEstimator;
  double drop_tol = 1e-8;
};

struct EstimatorRecord {
  int iteration = 0;          // conductivity updates performed so far
  double delta1 = 0.0;
  double delta2 = 0.0;
  bool after_enrichment = false;  // evaluated right after enriching at this iterate
};

struct RbzResult : ReconstructionResult {
  int basis_updates = 0;
  int n1 = 0;
  int n2 = 0;
  std::vector<int> enrichment_iterations;  // iteration count at each enrichment
  std::vector<EstimatorRecord> estimator_log;
};

// Reduced basis Harmonic Bz: enrich both spaces with full solves at the current
// iterate, run the projected iteration on reduced solutions until either the
// log iterates settle below epsilon1 (done) or the estimator criterion exceeds
// epsilon2 (enrich again at the current iterate, which is kept).
//
// The first snapshot pair doubles as the lifting of each space, so no extra
// full solves are spent on setup.
RbzResult reconstruct_rbz(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                          const RbzConfig& cfg = {});

// Same with estimator contexts computed beforehand (they depend on the mesh only).
RbzResult reconstruct_rbz(const Mesh& mesh, const RegionMasks& masks, const LaplacianBzData& data,
                          const EstimatorContext& ctx1, const EstimatorContext& ctx2,
                          const RbzConfig& cfg);

struct MetricsReport {
  double bz_vs_star = 0.0;   // ||sigma* - sigma_BZ|| / ||sigma_BZ||
  double rbz_vs_star = 0.0;  // ||sigma* - sigma_RBZ|| / ||sigma_RBZ||
  double rbz_vs_bz = 0.0;    // ||sigma_RBZ - sigma_BZ|| / ||sigma_BZ||
  bool has_star = false;
  int bz_iterations = 0;
  int rbz_iterations = 0;
  int bz_full_solves = 0;
  int rbz_full_solves = 0;
  int rbz_basis_updates = 0;
  double bz_wall_ms = 0.0;
  double rbz_wall_ms = 0.0;
  double speedup_percent = 0.0;  // 100 (t_BZ - t_RBZ) / t_BZ
};

MetricsReport compare_runs(const ReconstructionResult& bz, const RbzResult& rbz,
                           const std::optional<NodalField>& sigma_star = std::nullopt);

}  // namespace mreit

#pragma once

#include "mreit/fem.hpp"
#include "mreit/mesh.hpp"
#include "mreit/phantom.hpp"

#include <cstdint>
#include <optional>

namespace mreit {

// Per-triangle Laplacians of the two Bz data sets.
struct LaplacianBzData {
  TriField lap1;
  TriField lap2;
  double noise_level = 0.0;
  std::optional<std::uint64_t> seed;  // empty for noiseless data

  int num_triangles() const { return static_cast<int>(lap1.size()); }
  const TriField& channel(Drive d) const { return d == Drive::First ? lap1 : lap2; }
};

// How the per-triangle conductivity gradient entering the data is formed.
//   LogConsistent: mean(sigma)_T * grad(ln sigma)|_T, the gradient that the
//                  reconstruction inverts exactly (sigma* is a discrete fixed
//                  point of the iteration).
//   Linear:        grad(sigma)|_T of the P1 interpolant.
// Both agree to O(h) on smooth fields.
enum class GradientRule { LogConsistent, Linear };

struct SynthOptions {
  double mu0 = 1.0;
  GradientRule rule = GradientRule::LogConsistent;
  SolveOptions solve{};
};

TriVec2 conductivity_gradients(const Mesh& mesh, const NodalField& sigma, GradientRule rule);

// lap_j|_T = mu0 (dsigma/dx du_j/dy - dsigma/dy du_j/dx) with u_j the forward
// solutions for sigma_star.
LaplacianBzData synthesize_laplacian_bz(const Mesh& mesh, const NodalField& sigma_star,
                                        const SynthOptions& options = {});

// Same as above from precomputed forward solutions.
LaplacianBzData laplacian_bz_from_solutions(const Mesh& mesh, const NodalField& sigma_star,
                                            const NodalField& u1, const NodalField& u2,
                                            const SynthOptions& options = {});

// Synthesizes on `levels` uniform refinements of the mesh, sampling the phantom
// at the fine nodes, and area-averages the children back onto each coarse
// triangle. levels = 0 reproduces same-mesh synthesis.
LaplacianBzData synthesize_refined(const Mesh& mesh, const PixelPhantom& phantom, int levels = 1,
                                   const SynthOptions& options = {});

// Area-weighted average of fine per-triangle values onto the coarse mesh.
// Fine triangles c * 4^levels .. (c + 1) * 4^levels - 1 belong to coarse c.
TriField aggregate_children(const Mesh& fine, const TriField& values, int levels);

// out = in + level * ref * g with g ~ N(0, 1) drawn from a counter-based stream
// keyed by (seed, channel, triangle). ref = |in|, or the channel's mean |in|
// where in == 0.
LaplacianBzData add_relative_noise(const LaplacianBzData& data, double level, std::uint64_t seed);

// Standard normal deviate for the counter (seed, stream, index).
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace mreit

#include "mreit/synthetic.hpp"

#include "mreit/errors.hpp"
#include "mreit/forward.hpp"

#include <cmath>
#include <numbers>

namespace mreit {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1].
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, int draw) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (2 * index + static_cast<std::uint64_t>(draw)));
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = counter_uniform(seed, stream, index, 0);
  const double u2 = counter_uniform(seed, stream, index, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

TriVec2 conductivity_gradients(const Mesh& mesh, const NodalField& sigma, GradientRule rule) {
  if (rule == GradientRule::Linear) return element_gradients(mesh, sigma);
  const NodalField log_sigma = sigma.array().log().matrix();
  TriVec2 g = element_gradients(mesh, log_sigma);
  for (int t = 0; t < mesh.num_triangles(); ++t) g[t] *= vertex_mean(mesh, sigma, t);
  return g;
}

LaplacianBzData laplacian_bz_from_solutions(const Mesh& mesh, const NodalField& sigma_star,
                                            const NodalField& u1, const NodalField& u2,
                                            const SynthOptions& options) {
  const TriVec2 gs = conductivity_gradients(mesh, sigma_star, options.rule);
  const TriVec2 g1 = element_gradients(mesh, u1);
  const TriVec2 g2 = element_gradients(mesh, u2);
  LaplacianBzData data;
  data.lap1.resize(mesh.num_triangles());
  data.lap2.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    data.lap1[t] = options.mu0 * (gs[t].x() * g1[t].y() - gs[t].y() * g1[t].x());
    data.lap2[t] = options.mu0 * (gs[t].x() * g2[t].y() - gs[t].y() * g2[t].x());
  }
  return data;
}

LaplacianBzData synthesize_laplacian_bz(const Mesh& mesh, const NodalField& sigma_star,
                                        const SynthOptions& options) {
  const SparseMatrix k = assemble_stiffness(mesh, sigma_star);
  const NodalField u1 = solve_forward(mesh, k, sigma_star, {Drive::First}, options.solve);
  const NodalField u2 = solve_forward(mesh, k, sigma_star, {Drive::Second}, options.solve);
  return laplacian_bz_from_solutions(mesh, sigma_star, u1, u2, options);
}

TriField aggregate_children(const Mesh& fine, const TriField& values, int levels) {
  const int per_parent = 1 << (2 * levels);
  if (fine.num_triangles() % per_parent != 0 || values.size() != fine.num_triangles()) {
    throw Error(ErrorKind::MeshMismatch, "fine field does not match refinement depth");
  }
  const int coarse = fine.num_triangles() / per_parent;
  TriField out(coarse);
  for (int c = 0; c < coarse; ++c) {
    double weighted = 0.0, area = 0.0;
    for (int k = 0; k < per_parent; ++k) {
      const int t = c * per_parent + k;
      weighted += fine.area(t) * values[t];
      area += fine.area(t);
    }
    out[c] = weighted / area;
  }
  return out;
}

LaplacianBzData synthesize_refined(const Mesh& mesh, const PixelPhantom& phantom, int levels,
                                   const SynthOptions& options) {
  if (levels < 0) throw Error(ErrorKind::InvalidArgument, "refinement levels must be >= 0");
  Mesh fine = mesh;
  for (int l = 0; l < levels; ++l) fine = refine_uniform(fine);
  const NodalField sigma_fine = pixels_to_nodal(phantom, fine);
  const LaplacianBzData fine_data = synthesize_laplacian_bz(fine, sigma_fine, options);
  if (levels == 0) return fine_data;
  LaplacianBzData data;
  data.lap1 = aggregate_children(fine, fine_data.lap1, levels);
  data.lap2 = aggregate_children(fine, fine_data.lap2, levels);
  return data;
}

LaplacianBzData add_relative_noise(const LaplacianBzData& data, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise level must be >= 0");
  LaplacianBzData out = data;
  out.noise_level = level;
  out.seed = seed;
  if (level == 0.0) return out;
  for (int channel = 0; channel < 2; ++channel) {
    const TriField& in = channel == 0 ? data.lap1 : data.lap2;
    TriField& dst = channel == 0 ? out.lap1 : out.lap2;
    const double mean_abs = in.size() == 0 ? 0.0 : in.cwiseAbs().mean();
    for (Eigen::Index t = 0; t < in.size(); ++t) {
      const double ref = in[t] != 0.0 ? std::abs(in[t]) : mean_abs;
      dst[t] = in[t] + level * ref *
                           counter_normal(seed, static_cast<std::uint64_t>(channel + 1),
                                          static_cast<std::uint64_t>(t));
    }
  }
  return out;
}

}  // namespace mreit

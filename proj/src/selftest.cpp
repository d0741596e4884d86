#include "mreit/selftest.hpp"

#include "mreit/errors.hpp"
#include "mreit/fem.hpp"
#include "mreit/forward.hpp"
#include "mreit/harmonic_bz.hpp"
#include "mreit/io.hpp"
#include "mreit/mesh.hpp"
#include "mreit/rbz.hpp"
#include "mreit/render.hpp"
#include "mreit/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

namespace mreit {

namespace {

// A failing property; the message becomes the check's detail.
struct Violation {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Violation{what};
}

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

NodalField random_positive(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  NodalField f(mesh.num_nodes());
  for (auto& v : f) v = d(rng);
  return f;
}

std::string check_mesh_area() {
  for (int n : {1, 2, 3, 7, 16, 33, 64}) {
    const Mesh m = build_structured_mesh(n);
    double total = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      require(m.area(t) > 0.0, "non-positive area at n=" + std::to_string(n));
      total += m.area(t);
    }
    require(std::abs(total - 4.0) <= 1e-12, "area sum " + num(total) + " at n=" + std::to_string(n));
    require(m.num_nodes() == (n + 1) * (n + 1) && m.num_triangles() == 2 * n * n,
            "entity counts at n=" + std::to_string(n));
    require(static_cast<int>(m.boundary_edges().size()) == 4 * n, "boundary edge count");
  }
  return "areas sum to 4 for n in {1,2,3,7,16,33,64}";
}

std::string check_mesh_tags() {
  for (int n : {20, 40, 64, 260}) {
    const Mesh m = tag_boundaries(build_structured_mesh(n));
    std::array<std::set<int>, 4> sets;
    std::array<int, 4> edges{};
    for (const auto& e : m.boundary_edges()) {
      if (e.tag == BoundaryTag::Insulated) continue;
      const int k = static_cast<int>(e.tag);
      ++edges[k];
      sets[k].insert(e.a);
      sets[k].insert(e.b);
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        for (int v : sets[a]) require(!sets[b].count(v), "electrodes share a node");
      }
    }
    require(std::all_of(edges.begin(), edges.end(), [&](int c) { return c == edges[0]; }),
            "electrode edge counts differ at n=" + std::to_string(n));
    if (n == 260) require(edges[0] == 26, "expected 26 edges per electrode at n=260");
    // Reflections of the square permute the electrodes.
    const int s = n + 1;
    auto mirror_x = [&](int v) { return (v / s) * s + (n - v % s); };
    auto swap_xy = [&](int v) { return (v % s) * s + v / s; };
    std::set<int> mx, sw;
    for (int v : sets[0]) mx.insert(mirror_x(v));
    for (int v : sets[0]) sw.insert(swap_xy(v));
    require(mx == sets[1], "E1plus does not mirror onto E1minus");
    require(sw == sets[2], "E1plus does not transpose onto E2plus");
  }
  return "electrodes disjoint, balanced and reflection-symmetric; 26 edges each at n=260";
}

std::string check_mask_monotone() {
  const Mesh m = build_structured_mesh(40);
  std::vector<bool> prev(m.num_triangles(), true);
  for (double r : {0.99, 0.95, 0.9, 0.7, 0.5, 0.2}) {
    const RegionMasks masks = region_masks(m, r, std::min(r, 0.9));
    for (int t = 0; t < m.num_triangles(); ++t) {
      require(!masks.inner[t] || prev[t], "shrinking r_inner added a triangle");
      require(!masks.contrast[t] || masks.inner[t], "contrast mask escapes inner mask");
    }
    prev = masks.inner;
  }
  return "inner mask shrinks monotonically and contains the contrast mask";
}

std::string check_patch_test(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const Mesh m = build_structured_mesh(12);
  const std::vector<int> bnd = m.boundary_nodes();
  std::vector<char> on_boundary(m.num_nodes(), 0);
  for (int v : bnd) on_boundary[v] = 1;
  double worst_row = 0.0, worst_sol = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), s = 0.5 + std::abs(coef(rng));
    NodalField u(m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) u[i] = a * m.node(i).x() + b * m.node(i).y() + c;
    const SparseMatrix k = assemble_stiffness(m, NodalField::Constant(m.num_nodes(), s));
    const Eigen::VectorXd ku = k * u;
    for (int i = 0; i < m.num_nodes(); ++i) {
      if (!on_boundary[i]) worst_row = std::max(worst_row, std::abs(ku[i]));
    }
    std::vector<Constraint> cons;
    for (int v : bnd) cons.push_back({v, u[v]});
    const NodalField x =
        solve_spd(apply_dirichlet({k, Eigen::VectorXd::Zero(m.num_nodes()), {}}, cons), {1e-12, 0});
    worst_sol = std::max(worst_sol, max_norm(x - u));
  }
  require(worst_row <= 1e-12, "interior rows of K u_lin reach " + num(worst_row));
  require(worst_sol <= 1e-9, "manufactured linear solution off by " + num(worst_sol));
  return "interior residual " + num(worst_row) + ", linear reproduction " + num(worst_sol);
}

std::string check_weak_divergence(std::mt19937_64& rng) {
  const Mesh m = build_structured_mesh(9);
  const SparseMatrix k1 = assemble_stiffness(m, NodalField::Ones(m.num_nodes()));
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const NodalField w = random_positive(m, rng, -1.0, 1.0);
    const Eigen::VectorXd lhs = weak_divergence_rhs(m, element_gradients(m, w));
    const Eigen::VectorXd rhs = k1 * w;
    worst = std::max(worst, max_norm(lhs - rhs) / std::max(1.0, max_norm(rhs)));
  }
  require(worst <= 1e-12, "weak divergence of grad w deviates from K1 w by " + num(worst));
  return "max deviation " + num(worst);
}

std::string check_flux_balance(std::mt19937_64& rng) {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  double worst = 0.0, worst_total = 0.0, worst_scaled = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const NodalField sigma = random_positive(m, rng, 0.5, 2.0);
    for (Drive d : {Drive::First, Drive::Second}) {
      const NodalField u = solve_forward(m, sigma, {d}, {1e-12, 0});
      const double plus = electrode_flux(m, sigma, u, positive_tag(d));
      const double minus = electrode_flux(m, sigma, u, negative_tag(d));
      require(plus > 0.0, "flux out of E+ is not positive");
      worst = std::max(worst, std::abs(plus + minus) / plus);
      worst_total = std::max(worst_total, std::abs(total_flux(m, sigma, u)) / plus);
      const double current = 0.25 + trial;
      const NodalField scaled = solve_forward(m, sigma, {d, current, true}, {1e-12, 0});
      worst_scaled = std::max(worst_scaled,
                              std::abs(electrode_flux(m, sigma, scaled, positive_tag(d)) - current) / current);
    }
  }
  require(worst <= 1e-8, "E+ and E- fluxes fail to cancel: " + num(worst));
  require(worst_total <= 1e-8, "total boundary flux " + num(worst_total));
  require(worst_scaled <= 1e-10, "scaled solution carries wrong current: " + num(worst_scaled));
  return "antisymmetry " + num(worst) + ", scaled current " + num(worst_scaled);
}

std::string check_forward_symmetry() {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const int center = 10 * 21 + 10;
  for (Drive d : {Drive::First, Drive::Second}) {
    const NodalField u = solve_forward(m, NodalField::Ones(m.num_nodes()), {d}, {1e-12, 0});
    require(std::abs(u[center] - 0.5) <= 1e-9, "u(0,0) = " + num(u[center]));
    require(u.minCoeff() >= -1e-12 && u.maxCoeff() <= 1.0 + 1e-12, "discrete maximum principle violated");
  }
  return "u(0,0) = 0.5 and 0 <= u <= 1 for both drives";
}

std::string check_noise(std::uint64_t seed) {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const LaplacianBzData clean =
      synthesize_laplacian_bz(m, pixels_to_nodal(smooth_bumps(20, 20), m));
  const LaplacianBzData a = add_relative_noise(clean, 0.1, seed);
  const LaplacianBzData b = add_relative_noise(clean, 0.1, seed);
  const LaplacianBzData c = add_relative_noise(clean, 0.1, seed + 1);
  require(a.lap1 == b.lap1 && a.lap2 == b.lap2, "same seed gave different noise");
  require(a.lap1 != c.lap1, "different seeds gave identical noise");
  require(a.seed && *a.seed == seed && a.noise_level == 0.1, "noise metadata not recorded");
  std::ostringstream sa, sb;
  write_data(sa, a);
  write_data(sb, b);
  require(sa.str() == sb.str(), "serialized noisy data differ");

  double sum = 0.0, sq = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const double g = counter_normal(seed, 3, static_cast<std::uint64_t>(i));
    sum += g;
    sq += g * g;
  }
  const double mean = sum / draws, var = sq / draws - mean * mean;
  require(std::abs(mean) < 0.01 && std::abs(var - 1.0) < 0.02, "normal stream mean " + num(mean) + " var " + num(var));
  return "byte-identical per seed; stream mean " + num(mean) + ", variance " + num(var);
}

std::string check_round_trips(std::mt19937_64& rng, const fs::path& dir) {
  std::uniform_real_distribution<double> expo(-300.0, 300.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto wild = [&] { return unit(rng) * std::pow(10.0, expo(rng)); };

  const Mesh mesh = refine_uniform(tag_boundaries(build_structured_mesh(5), 0.3));
  write_mesh(dir / "m.mesh", mesh);
  require(read_mesh(dir / "m.mesh") == mesh, "mesh round-trip");

  NodalField f(mesh.num_nodes());
  for (auto& v : f) v = wild();
  f[0] = 0.0;
  f[1] = -0.0;
  f[2] = 1.0 / 3.0;
  f[3] = 5e-324;
  write_field(dir / "f.field", f);
  const NodalField g = read_field(dir / "f.field");
  require(g == f && std::signbit(g[1]), "nodal field round-trip");

  TriField tf(mesh.num_triangles());
  for (auto& v : tf) v = wild();
  write_trifield(dir / "t.tri", tf);
  require(read_trifield(dir / "t.tri") == tf, "triangle field round-trip");

  TriVec2 tv(mesh.num_triangles());
  for (auto& v : tv) v = Eigen::Vector2d(wild(), wild());
  write_trivec(dir / "t.vec", tv);
  require(read_trivec(dir / "t.vec") == tv, "triangle vector round-trip");

  LaplacianBzData data{tf, tf.reverse(), 0.1, 18446744073709551615ULL};
  write_data(dir / "d.data", data);
  const LaplacianBzData back = read_data(dir / "d.data");
  require(back.lap1 == data.lap1 && back.lap2 == data.lap2 && back.noise_level == 0.1 &&
              back.seed == data.seed,
          "data round-trip");
  data.seed.reset();
  write_data(dir / "d0.data", data);
  require(!read_data(dir / "d0.data").seed, "noiseless data round-trip");

  ReducedSpace space = ReducedSpace::init(mesh, Drive::Second);
  space.enrich(mesh, solve_forward(mesh, random_positive(mesh, rng, 0.5, 2.0), {Drive::Second}));
  space.enrich(mesh, solve_forward(mesh, random_positive(mesh, rng, 0.5, 2.0), {Drive::Second}));
  write_space(dir / "s.space", space);
  const ReducedSpace sp = read_space(dir / "s.space", mesh);
  require(sp.drive() == space.drive() && sp.lifting() == space.lifting() && sp.basis() == space.basis(),
          "reduced space round-trip");

  const KeyValues kv{{"status", "converged"}, {"note", "two words"}, {"empty", ""}};
  write_key_values(dir / "r.txt", kv);
  require(read_key_values(dir / "r.txt") == kv, "key-value round-trip");

  GrayImage img{7, 3, std::vector<std::uint8_t>(21), false};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 12);
  write_pgm(dir / "i.pgm", img);
  require(read_pgm(dir / "i.pgm").pixels == img.pixels, "PGM round-trip");
  return "mesh, fields, data, reduced space, key-value and PGM files";
}

std::string check_trivial_runs() {
  const Mesh m = tag_boundaries(build_structured_mesh(20));
  const RegionMasks masks = region_masks(m);
  const LaplacianBzData data = synthesize_laplacian_bz(m, NodalField::Constant(m.num_nodes(), 1.7));
  require(data.lap1.cwiseAbs().maxCoeff() == 0.0 && data.lap2.cwiseAbs().maxCoeff() == 0.0,
          "constant conductivity produced nonzero data");
  const ReconstructionResult bz = reconstruct_bz(m, masks, data);
  require(bz.iterations == 1 && bz.forward_solves == 2 && bz.status == RunStatus::Converged,
          "BZ on zero data: " + std::to_string(bz.iterations) + " iterations");
  require((bz.sigma.array() == 1.0).all(), "BZ did not return sigma_b exactly");
  const RbzResult rbz = reconstruct_rbz(m, masks, data);
  require(rbz.iterations == 1 && rbz.forward_solves == 2 && rbz.basis_updates == 1,
          "RBZ on zero data: " + std::to_string(rbz.iterations) + " iterations, " +
              std::to_string(rbz.forward_solves) + " full solves");
  require((rbz.sigma.array() == 1.0).all() && rbz.n1 <= 2 && rbz.n2 <= 2, "RBZ did not return sigma_b");

  const Raster r = rasterize(m, NodalField::Constant(m.num_nodes(), 2.0), 20, 20);
  const GrayImage img = to_gray(r);
  require(img.degenerate_range && std::all_of(img.pixels.begin(), img.pixels.end(), [](auto p) { return p == 128; }),
          "constant render is not uniform mid-gray");
  return "zero data: 1 iteration, 2 full solves for BZ and RBZ";
}

}  // namespace

std::vector<CheckResult> run_selftest(const SelftestOptions& options) {
  std::mt19937_64 rng(options.seed);
  fs::path dir = options.scratch;
  bool own_dir = false;
  if (dir.empty()) {
    dir = fs::temp_directory_path() / ("mreit-selftest-" + std::to_string(options.seed) + "-" +
                                       std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    own_dir = true;
  }
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::function<std::string()>>> suites = {
      {"mesh_area", check_mesh_area},
      {"mesh_tags", check_mesh_tags},
      {"mask_monotone", check_mask_monotone},
      {"patch_test", [&] { return check_patch_test(rng); }},
      {"weak_divergence_identity", [&] { return check_weak_divergence(rng); }},
      {"flux_antisymmetry", [&] { return check_flux_balance(rng); }},
      {"forward_symmetry", check_forward_symmetry},
      {"noise_determinism", [&] { return check_noise(options.seed); }},
      {"file_round_trips", [&] { return check_round_trips(rng, dir); }},
      {"trivial_data_runs", check_trivial_runs},
  };

  std::vector<CheckResult> out;
  for (const auto& [name, fn] : suites) {
    CheckResult r{name, false, "", 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = fn();
      r.pass = true;
    } catch (const Violation& v) {
      r.detail = v.what;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  if (own_dir) {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  return out;
}

}  // namespace mreit

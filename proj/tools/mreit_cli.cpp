// mreit: synthetic data generation, Harmonic Bz / RBZ reconstruction,
// rendering and metrics for 2D MREIT.
//
// Exit codes: 0 success, 1 usage, 2 I/O or malformed input, 3 numerical
// failure, 4 iteration cap reached without convergence.

#include "mreit/errors.hpp"
#include "mreit/harmonic_bz.hpp"
#include "mreit/io.hpp"
#include "mreit/mesh.hpp"
#include "mreit/metrics.hpp"
#include "mreit/phantom.hpp"
#include "mreit/rbz.hpp"
#include "mreit/render.hpp"
#include "mreit/selftest.hpp"
#include "mreit/synthetic.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace mreit;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3, kMaxIter = 4 };

struct Globals {
  std::string mesh;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 7;
  std::string command_line;
};

struct SynthArgs {
  int n = 64;
  std::string phantom = "shepp-logan";
  int pixels = 0;
  double offset = 1.0;
  double value = 1.0;
  double halfwidth = 0.1;
  double noise = 0.0;
  bool inverse_crime = false;
  int levels = 1;
  std::string rule = "log";
  double mu0 = 1.0;
};

struct ReconArgs {
  std::string data;
  std::string algo = "bz";
  double epsilon = 1e-6;
  double epsilon2 = 1e-3;
  std::string trust = "min";
  int max_iter = 100;
  double mu0 = 1.0;
  double sigma_b = 1.0;
  double r_inner = 0.95;
  std::string det_guard = "error";
  double det_floor = 1e-12;
  std::string prefix;
};

struct RenderArgs {
  std::string field;
  std::string out;
  int width = 520;
  int height = 520;
  std::vector<double> range;
};

struct MetricsArgs {
  std::vector<std::string> fields;
  std::string reference;
  bool contrast = false;
  double r_contrast = 0.9;
  std::string json_out;
};

fs::path out_path(const Globals& g, const std::string& name) { return fs::path(g.out_dir) / name; }

Mesh load_mesh(const Globals& g) {
  if (g.mesh.empty()) throw CLI::RequiredError("--mesh");
  return read_mesh(fs::path(g.mesh));
}

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(g.out_dir);
  const Mesh mesh = g.mesh.empty() ? tag_boundaries(build_structured_mesh(a.n), a.halfwidth)
                                   : read_mesh(fs::path(g.mesh));
  const int res = a.pixels > 0 ? a.pixels : (g.mesh.empty() ? a.n : 260);
  PixelPhantom phantom;
  if (a.phantom == "shepp-logan") {
    phantom = shepp_logan(res, res, a.offset);
  } else if (a.phantom == "constant") {
    phantom = constant_phantom(res, res, a.value);
  } else if (a.phantom == "smooth") {
    phantom = smooth_bumps(res, res);
  } else {
    throw CLI::ValidationError("--phantom", "unknown phantom '" + a.phantom + "'");
  }

  SynthOptions opts;
  opts.mu0 = a.mu0;
  opts.rule = a.rule == "linear" ? GradientRule::Linear : GradientRule::LogConsistent;
  const NodalField sigma_star = pixels_to_nodal(phantom, mesh);
  const LaplacianBzData clean = a.inverse_crime ? synthesize_laplacian_bz(mesh, sigma_star, opts)
                                                : synthesize_refined(mesh, phantom, a.levels, opts);

  RunManifest manifest;
  manifest.command = g.command_line;
  manifest.config = {{"n", mesh.num_triangles() == 2 * a.n * a.n ? a.n : -1},
                     {"phantom", a.phantom},
                     {"pixels", res},
                     {"offset", a.offset},
                     {"halfwidth", a.halfwidth},
                     {"noise", a.noise},
                     {"seed", g.seed},
                     {"inverse_crime", a.inverse_crime},
                     {"levels", a.inverse_crime ? 0 : a.levels},
                     {"gradient_rule", a.rule},
                     {"mu0", a.mu0}};
  if (!g.mesh.empty()) manifest.inputs.push_back(g.mesh);

  const fs::path mesh_file = out_path(g, "mesh.txt");
  const fs::path sigma_file = out_path(g, "sigma_star.field");
  const fs::path clean_file = out_path(g, "data_clean.data");
  write_mesh(mesh_file, mesh);
  write_field(sigma_file, sigma_star);
  write_data(clean_file, clean);
  manifest.outputs = {mesh_file, sigma_file, clean_file};
  if (a.noise > 0.0) {
    const fs::path noisy_file = out_path(g, "data_noisy.data");
    write_data(noisy_file, add_relative_noise(clean, a.noise, g.seed));
    manifest.outputs.push_back(noisy_file);
  }
  manifest.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  manifest.status = "ok";
  manifest.write(out_path(g, "synth_manifest.json"));
  for (const auto& p : manifest.outputs) std::cout << "wrote " << p.string() << '\n';
  return kOk;
}

int cmd_reconstruct(const Globals& g, const ReconArgs& a) {
  if (a.algo != "bz" && a.algo != "rbz") throw CLI::ValidationError("--algo", "must be bz or rbz");
  const Mesh mesh = load_mesh(g);
  const LaplacianBzData data = read_data(fs::path(a.data));
  const RegionMasks masks = region_masks(mesh, a.r_inner, std::min(0.9, a.r_inner));
  fs::create_directories(g.out_dir);

  RbzConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.mu0 = a.mu0;
  cfg.max_iterations = a.max_iter;
  cfg.sigma_b = a.sigma_b;
  cfg.det_floor = a.det_floor;
  cfg.det_guard = a.det_guard == "zero" ? DetGuard::ZeroOut : DetGuard::Error;
  cfg.threads = g.threads;
  cfg.epsilon2 = a.epsilon2;
  cfg.trust = parse_trust(a.trust);

  const std::string prefix = a.prefix.empty() ? a.algo : a.prefix;
  RunManifest manifest;
  manifest.command = g.command_line;
  manifest.config = {{"algo", a.algo},          {"epsilon", a.epsilon},   {"max_iter", a.max_iter},
                     {"mu0", a.mu0},            {"sigma_b", a.sigma_b},   {"r_inner", a.r_inner},
                     {"det_guard", a.det_guard}, {"det_floor", a.det_floor}, {"threads", g.threads}};
  if (a.algo == "rbz") {
    manifest.config["epsilon2"] = a.epsilon2;
    manifest.config["trust"] = a.trust;
  }
  manifest.inputs = {g.mesh, a.data};

  const fs::path sigma_file = out_path(g, prefix + "_sigma.field");
  const fs::path result_file = out_path(g, prefix + "_result.txt");
  const fs::path csv_file = out_path(g, prefix + "_iterations.csv");
  ReconstructionResult base;
  if (a.algo == "bz") {
    base = reconstruct_bz(mesh, masks, data, cfg);
    write_key_values(result_file, result_manifest(base));
  } else {
    const RbzResult r = reconstruct_rbz(mesh, masks, data, cfg);
    const fs::path est_file = out_path(g, prefix + "_estimators.csv");
    write_key_values(result_file, result_manifest(r));
    write_estimator_csv(est_file, r);
    manifest.outputs.push_back(est_file);
    std::cout << "basis_updates " << r.basis_updates << "\nfull_solves " << r.forward_solves << "\nN1 " << r.n1
              << "\nN2 " << r.n2 << '\n';
    base = r;
  }
  write_field(sigma_file, base.sigma);
  write_iteration_csv(csv_file, base);
  manifest.outputs.insert(manifest.outputs.begin(), {sigma_file, result_file, csv_file});
  manifest.wall_ms = base.wall_ms;
  manifest.status = std::string(status_name(base.status));
  manifest.write(out_path(g, prefix + "_manifest.json"));

  std::cout << "iterations " << base.iterations << "\nforward_solves " << base.forward_solves << "\nstatus "
            << status_name(base.status) << "\nfinal_diff " << base.final_diff << "\nwall_ms " << base.wall_ms
            << '\n';
  return base.status == RunStatus::Converged ? kOk : kMaxIter;
}

int cmd_render(const Globals& g, const RenderArgs& a) {
  const Mesh mesh = load_mesh(g);
  const NodalField field = read_field(fs::path(a.field));
  std::optional<std::pair<double, double>> range;
  if (!a.range.empty()) range = std::pair{a.range[0], a.range[1]};
  const GrayImage img = to_gray(rasterize(mesh, field, a.width, a.height), range);
  if (img.degenerate_range) std::cerr << "warning: degenerate value range, writing uniform gray\n";
  fs::path out = a.out;
  if (out.is_relative() && out.parent_path().empty()) out = out_path(g, a.out);
  if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
  write_pgm(out, img);
  std::cout << "wrote " << out.string() << '\n';
  return kOk;
}

int cmd_metrics(const Globals& g, const MetricsArgs& a) {
  std::vector<std::pair<std::string, NodalField>> fields;
  for (const auto& f : a.fields) fields.emplace_back(f, read_field(fs::path(f)));
  if (!a.reference.empty()) fields.emplace_back(a.reference, read_field(fs::path(a.reference)));
  if (fields.size() < 2) throw CLI::ValidationError("metrics", "need at least two fields");
  for (const auto& f : fields) {
    if (f.second.size() != fields[0].second.size()) {
      throw Error(ErrorKind::MeshMismatch, "'" + f.first + "' lives on a different mesh");
    }
  }
  std::optional<std::vector<int>> nodes;
  if (a.contrast) {
    const Mesh mesh = load_mesh(g);
    if (mesh.num_nodes() != fields[0].second.size()) {
      throw Error(ErrorKind::MeshMismatch, "fields do not match the mesh");
    }
    nodes = masked_nodes(mesh, region_masks(mesh, std::max(0.95, a.r_contrast), a.r_contrast).contrast);
  }

  json report = json::array();
  std::cout << "field,reference,relative_error\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (i == j) continue;
      if (!a.reference.empty() && j + 1 != fields.size()) continue;
      const double e = nodes ? relative_error(fields[i].second, fields[j].second, *nodes)
                             : relative_error(fields[i].second, fields[j].second);
      std::cout << fields[i].first << ',' << fields[j].first << ',' << format_double(e) << '\n';
      report.push_back({{"field", fields[i].first}, {"reference", fields[j].first}, {"relative_error", e}});
    }
  }
  if (!a.json_out.empty()) {
    std::ofstream out(a.json_out);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + a.json_out + "' for writing");
    out << json{{"region", a.contrast ? "contrast" : "all"}, {"pairs", report}}.dump(2) << '\n';
  }
  return kOk;
}

int cmd_selftest(const Globals& g) {
  SelftestOptions opts;
  opts.seed = g.seed;
  bool ok = true;
  for (const auto& r : run_selftest(opts)) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << static_cast<long>(r.ms) << " ms): " << r.detail
              << '\n';
    ok = ok && r.pass;
  }
  return ok ? kOk : kNumerical;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument:
      return kUsage;
    case ErrorKind::Io:
    case ErrorKind::Parse:
    case ErrorKind::MeshMismatch:
      return kIo;
    default:
      return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D MREIT reconstruction toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  for (int i = 0; i < argc; ++i) g.command_line += (i ? " " : "") + std::string(argv[i]);
  app.add_option("--mesh", g.mesh, "mesh file");
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "concurrent drive solves (1 = sequential)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", g.seed, "noise / test seed")->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate mesh, conductivity and Bz Laplacian data");
  synth->add_option("--n", sa.n, "subdivisions per axis")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--phantom", sa.phantom, "shepp-logan | constant | smooth")
      ->check(CLI::IsMember({"shepp-logan", "constant", "smooth"}))
      ->capture_default_str();
  synth->add_option("--pixels", sa.pixels, "phantom resolution (default: n)");
  synth->add_option("--offset", sa.offset, "Shepp-Logan background offset")->capture_default_str();
  synth->add_option("--value", sa.value, "constant phantom value")->capture_default_str();
  synth->add_option("--halfwidth", sa.halfwidth, "electrode half-width")->capture_default_str();
  synth->add_option("--noise", sa.noise, "relative noise level")->check(CLI::NonNegativeNumber);
  synth->add_flag("--inverse-crime", sa.inverse_crime, "synthesize on the reconstruction mesh");
  synth->add_option("--levels", sa.levels, "refinement levels for data synthesis")
      ->check(CLI::Range(0, 4))
      ->capture_default_str();
  synth->add_option("--gradient-rule", sa.rule, "log | linear")
      ->check(CLI::IsMember({"log", "linear"}))
      ->capture_default_str();
  synth->add_option("--mu0", sa.mu0)->capture_default_str();

  ReconArgs ra;
  auto* recon = app.add_subcommand("reconstruct", "run Harmonic Bz or RBZ");
  recon->add_option("--data", ra.data, "Laplacian Bz data file")->required();
  recon->add_option("--algo", ra.algo, "bz | rbz")->check(CLI::IsMember({"bz", "rbz"}))->capture_default_str();
  recon->add_option("--epsilon,--epsilon1", ra.epsilon, "termination tolerance on log iterates")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  recon->add_option("--epsilon2", ra.epsilon2, "estimator trust threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  recon->add_option("--trust", ra.trust, "min | max")->check(CLI::IsMember({"min", "max"}))->capture_default_str();
  recon->add_option("--max-iter", ra.max_iter)->check(CLI::PositiveNumber)->capture_default_str();
  recon->add_option("--mu0", ra.mu0)->check(CLI::PositiveNumber)->capture_default_str();
  recon->add_option("--sigma-b", ra.sigma_b, "boundary conductivity")->check(CLI::PositiveNumber)->capture_default_str();
  recon->add_option("--r-inner", ra.r_inner)->capture_default_str();
  recon->add_option("--det-guard", ra.det_guard, "error | zero")
      ->check(CLI::IsMember({"error", "zero"}))
      ->capture_default_str();
  recon->add_option("--det-floor", ra.det_floor)->capture_default_str();
  recon->add_option("--prefix", ra.prefix, "output file prefix (default: algo)");

  RenderArgs rn;
  auto* render = app.add_subcommand("render", "rasterize a nodal field to PGM");
  render->add_option("field", rn.field)->required();
  render->add_option("out", rn.out)->required();
  render->add_option("--width", rn.width)->check(CLI::PositiveNumber)->capture_default_str();
  render->add_option("--height", rn.height)->check(CLI::PositiveNumber)->capture_default_str();
  render->add_option("--range", rn.range, "explicit lo hi")->expected(2);

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "relative max-norm errors between fields");
  metrics->add_option("fields", ma.fields)->required();
  metrics->add_option("--reference", ma.reference, "compare every field against this one only");
  metrics->add_flag("--contrast-mask", ma.contrast, "restrict to vertices of Omega_c triangles");
  metrics->add_option("--r-contrast", ma.r_contrast)->capture_default_str();
  metrics->add_option("--json", ma.json_out, "also write a JSON report");

  app.add_subcommand("selftest", "run the property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return cmd_synth(g, sa);
    if (*recon) return cmd_reconstruct(g, ra);
    if (*render) return cmd_render(g, rn);
    if (*metrics) return cmd_metrics(g, ma);
    return cmd_selftest(g);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
}

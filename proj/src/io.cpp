#include "mreit/io.hpp"

#include "mreit/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string_view>

namespace mreit {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      auto toks = split(line);
      if (!toks.empty()) return toks;
    }
    fail("unexpected end of file");
  }

  std::vector<std::string> next(std::size_t arity) {
    auto toks = next();
    if (toks.size() != arity) {
      fail("expected " + std::to_string(arity) + " fields, found " + std::to_string(toks.size()));
    }
    return toks;
  }

  void header(std::string_view magic) {
    auto toks = next();
    if (toks.size() != 2 || toks[0] != magic || toks[1] != "1") {
      fail("expected header '" + std::string(magic) + " 1'");
    }
  }

  long count(std::string_view key) {
    auto toks = next(2);
    if (toks[0] != key) fail("expected '" + std::string(key) + " <count>'");
    const long n = integer(toks[1]);
    if (n < 0) fail("negative count");
    return n;
  }

  long integer(const std::string& tok) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) fail("invalid integer '" + tok + "'");
    return v;
  }

  double real(const std::string& tok) {
    try {
      return parse_double(tok);
    } catch (const Error&) {
      fail("invalid number '" + tok + "'");
    }
  }

  void finish() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!split(line).empty()) fail("trailing content");
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

template <typename T>
void save(const fs::path& path, const T& value, void (*writer)(std::ostream&, const T&)) {
  auto out = open_out(path);
  writer(out, value);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

template <typename F>
auto load(const fs::path& path, F reader) {
  auto in = open_in(path);
  try {
    return reader(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_scalars(std::ostream& out, std::string_view magic, const Eigen::VectorXd& v) {
  out << magic << " 1\nlen " << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

Eigen::VectorXd read_scalars(std::istream& in, std::string_view magic) {
  LineReader r(in);
  r.header(magic);
  const long n = r.count("len");
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v[i] = r.real(r.next(1)[0]);
  r.finish();
  return v;
}

std::string hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(2 * n, '0');
  for (std::size_t i = 0; i < n; ++i) {
    s[2 * i] = digits[bytes[i] >> 4];
    s[2 * i + 1] = digits[bytes[i] & 15];
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error(ErrorKind::InvalidArgument, "cannot format number");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::Parse, "invalid number '" + std::string(text) + "'");
  }
  return v;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << "mrmesh 1\nnodes " << mesh.num_nodes() << '\n';
  for (const auto& p : mesh.nodes()) out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  out << "triangles " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary " << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges()) out << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
}

Mesh read_mesh(std::istream& in) {
  LineReader r(in);
  r.header("mrmesh");
  std::vector<Point> nodes(r.count("nodes"));
  for (auto& p : nodes) {
    auto t = r.next(2);
    p = Point(r.real(t[0]), r.real(t[1]));
  }
  std::vector<Mesh::Triangle> tris(r.count("triangles"));
  for (auto& tri : tris) {
    auto t = r.next(3);
    for (int k = 0; k < 3; ++k) tri[k] = static_cast<int>(r.integer(t[k]));
  }
  std::vector<BoundaryEdge> edges(r.count("boundary"));
  for (auto& e : edges) {
    auto t = r.next(3);
    e.a = static_cast<int>(r.integer(t[0]));
    e.b = static_cast<int>(r.integer(t[1]));
    try {
      e.tag = parse_tag(t[2]);
    } catch (const Error& err) {
      r.fail(err.what());
    }
  }
  r.finish();
  for (const auto& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(nodes.size()) || e.b >= static_cast<int>(nodes.size())) {
      throw Error(ErrorKind::Parse, "boundary edge references node out of range");
    }
  }
  try {
    return Mesh::from_parts(std::move(nodes), std::move(tris), std::move(edges));
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("invalid mesh: ") + e.what());
  }
}

void write_mesh(const fs::path& path, const Mesh& mesh) {
  save<Mesh>(path, mesh, &write_mesh);
}
Mesh read_mesh(const fs::path& path) {
  return load(path, [](std::istream& in) { return read_mesh(in); });
}

void write_field(std::ostream& out, const NodalField& field) { write_scalars(out, "mrfield", field); }
NodalField read_field(std::istream& in) { return read_scalars(in, "mrfield"); }
void write_field(const fs::path& path, const NodalField& field) {
  save<NodalField>(path, field, &write_field);
}
NodalField read_field(const fs::path& path) {
  return load(path, [](std::istream& in) { return read_field(in); });
}

void write_trifield(std::ostream& out, const TriField& field) { write_scalars(out, "mrtri", field); }
TriField read_trifield(std::istream& in) { return read_scalars(in, "mrtri"); }
void write_trifield(const fs::path& path, const TriField& field) {
  save<TriField>(path, field, &write_trifield);
}
TriField read_trifield(const fs::path& path) {
  return load(path, [](std::istream& in) { return read_trifield(in); });
}

void write_trivec(std::ostream& out, const TriVec2& field) {
  out << "mrtrivec 1\nlen " << field.size() << '\n';
  for (const auto& v : field) out << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
}
TriVec2 read_trivec(std::istream& in) {
  LineReader r(in);
  r.header("mrtrivec");
  TriVec2 out(r.count("len"));
  for (auto& v : out) {
    auto t = r.next(2);
    v = Eigen::Vector2d(r.real(t[0]), r.real(t[1]));
  }
  r.finish();
  return out;
}
void write_trivec(const fs::path& path, const TriVec2& field) { save<TriVec2>(path, field, &write_trivec); }
TriVec2 read_trivec(const fs::path& path) {
  return load(path, [](std::istream& in) { return read_trivec(in); });
}

void write_data(std::ostream& out, const LaplacianBzData& data) {
  if (data.lap2.size() != data.lap1.size()) {
    throw Error(ErrorKind::InvalidArgument, "data channels differ in length");
  }
  out << "mrdata 1\ntriangles " << data.lap1.size() << "\nnoise " << format_double(data.noise_level) << ' '
      << (data.seed ? std::to_string(*data.seed) : std::string("none")) << '\n';
  for (Eigen::Index t = 0; t < data.lap1.size(); ++t) {
    out << format_double(data.lap1[t]) << ' ' << format_double(data.lap2[t]) << '\n';
  }
}

LaplacianBzData read_data(std::istream& in) {
  LineReader r(in);
  r.header("mrdata");
  const long n = r.count("triangles");
  LaplacianBzData data;
  auto noise = r.next(3);
  if (noise[0] != "noise") r.fail("expected 'noise <level> <seed|none>'");
  data.noise_level = r.real(noise[1]);
  if (noise[2] != "none") {
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(noise[2].data(), noise[2].data() + noise[2].size(), seed);
    if (ec != std::errc{} || ptr != noise[2].data() + noise[2].size()) r.fail("invalid seed '" + noise[2] + "'");
    data.seed = seed;
  }
  data.lap1.resize(n);
  data.lap2.resize(n);
  for (long t = 0; t < n; ++t) {
    auto tok = r.next(2);
    data.lap1[t] = r.real(tok[0]);
    data.lap2[t] = r.real(tok[1]);
  }
  r.finish();
  return data;
}

void write_data(const fs::path& path, const LaplacianBzData& data) {
  save<LaplacianBzData>(path, data, &write_data);
}
LaplacianBzData read_data(const fs::path& path) {
  return load(path, [](std::istream& in) { return read_data(in); });
}

void write_space(const fs::path& path, const ReducedSpace& space) {
  const fs::path dir = path.parent_path();
  const std::string stem = path.stem().string();
  std::ostringstream manifest;
  manifest << "mrspace 1\ndrive " << static_cast<int>(space.drive()) << "\nN " << space.dimension() << '\n';
  const std::string lifting = stem + ".lifting.field";
  write_field(dir / lifting, space.lifting());
  manifest << "lifting " << lifting << '\n';
  for (int i = 0; i < space.dimension(); ++i) {
    const std::string name = stem + ".basis" + std::to_string(i) + ".field";
    write_field(dir / name, space.basis()[i]);
    manifest << "basis " << name << '\n';
  }
  auto out = open_out(path);
  out << manifest.str();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

ReducedSpace read_space(const fs::path& path, const Mesh& mesh) {
  const fs::path dir = path.parent_path();
  Drive drive = Drive::First;
  fs::path lifting;
  std::vector<fs::path> basis;
  load(path, [&](std::istream& in) {
    LineReader r(in);
    r.header("mrspace");
    const long d = r.count("drive");
    if (d != 1 && d != 2) r.fail("drive must be 1 or 2");
    drive = static_cast<Drive>(d);
    const long n = r.count("N");
    auto lift = r.next(2);
    if (lift[0] != "lifting") r.fail("expected 'lifting <file>'");
    lifting = dir / lift[1];
    for (long i = 0; i < n; ++i) {
      auto b = r.next(2);
      if (b[0] != "basis") r.fail("expected 'basis <file>'");
      basis.push_back(dir / b[1]);
    }
    r.finish();
    return 0;
  });
  std::vector<NodalField> fields;
  for (const auto& p : basis) fields.push_back(read_field(p));
  return ReducedSpace::from_parts(mesh, drive, read_field(lifting), std::move(fields));
}

void write_key_values(const fs::path& path, const KeyValues& entries) {
  auto out = open_out(path);
  for (const auto& [k, v] : entries) {
    if (k.empty() || k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "key-value entry '" + k + "' is not representable");
    }
    out << k << ' ' << v << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

KeyValues read_key_values(const fs::path& path) {
  auto in = open_in(path);
  KeyValues out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) {
      out.emplace_back(line, "");
    } else {
      out.emplace_back(line.substr(0, sp), line.substr(sp + 1));
    }
  }
  return out;
}

const std::string* find_value(const KeyValues& entries, std::string_view key) {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

KeyValues result_manifest(const ReconstructionResult& result) {
  return {
      {"iterations", std::to_string(result.iterations)},
      {"forward_solves", std::to_string(result.forward_solves)},
      {"wall_ms", format_double(result.wall_ms)},
      {"status", std::string(status_name(result.status))},
      {"final_diff", format_double(result.final_diff)},
      {"setup_ms", format_double(result.phases.setup_ms)},
      {"assembly_ms", format_double(result.phases.assembly_ms)},
      {"full_solve_ms", format_double(result.phases.full_solve_ms)},
      {"reduced_solve_ms", format_double(result.phases.reduced_solve_ms)},
      {"estimator_ms", format_double(result.phases.estimator_ms)},
      {"poisson_ms", format_double(result.phases.poisson_ms)},
  };
}

KeyValues result_manifest(const RbzResult& result) {
  KeyValues kv = result_manifest(static_cast<const ReconstructionResult&>(result));
  kv.emplace_back("basis_updates", std::to_string(result.basis_updates));
  kv.emplace_back("full_solves", std::to_string(result.forward_solves));
  kv.emplace_back("N1", std::to_string(result.n1));
  kv.emplace_back("N2", std::to_string(result.n2));
  return kv;
}

void write_iteration_csv(const fs::path& path, const ReconstructionResult& result) {
  auto out = open_out(path);
  out << "iteration,diff\n";
  for (std::size_t i = 0; i < result.diff_history.size(); ++i) {
    out << i + 1 << ',' << format_double(result.diff_history[i]) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

void write_estimator_csv(const fs::path& path, const RbzResult& result) {
  auto out = open_out(path);
  out << "iteration,delta1,delta2,after_enrichment\n";
  for (const auto& e : result.estimator_log) {
    out << e.iteration << ',' << format_double(e.delta1) << ',' << format_double(e.delta2) << ','
        << (e.after_enrichment ? 1 : 0) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string git_blob_sha1_bytes(std::string_view content) {
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorKind::Io, "SHA-1 digest failed");
  }
  return hex(digest.data(), len);
}

std::string git_blob_sha1(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return git_blob_sha1_bytes(ss.str());
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& p : inputs) j["inputs"].push_back({{"path", p.string()}, {"sha1", git_blob_sha1(p)}});
  j["outputs"] = nlohmann::json::array();
  for (const auto& p : outputs) j["outputs"].push_back(p.string());
  j["wall_ms"] = wall_ms;
  j["status"] = status;
  return j;
}

void RunManifest::write(const fs::path& path) const {
  auto out = open_out(path);
  out << to_json().dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace mreit

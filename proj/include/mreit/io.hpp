#pragma once

#include "mreit/fem.hpp"
#include "mreit/harmonic_bz.hpp"
#include "mreit/mesh.hpp"
#include "mreit/rbz.hpp"
#include "mreit/reduced_basis.hpp"
#include "mreit/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mreit {

namespace fs = std::filesystem;

// Shortest decimal that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

// Text formats. Stream versions report parse errors by line number; path
// versions prefix messages with the path and raise Io when the file cannot be
// opened.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
void write_mesh(const fs::path& path, const Mesh& mesh);
Mesh read_mesh(const fs::path& path);

// `mrfield 1` / `len n` / one value per line.
void write_field(std::ostream& out, const NodalField& field);
NodalField read_field(std::istream& in);
void write_field(const fs::path& path, const NodalField& field);
NodalField read_field(const fs::path& path);

// `mrtri 1` / `len n` / one value per line.
void write_trifield(std::ostream& out, const TriField& field);
TriField read_trifield(std::istream& in);
void write_trifield(const fs::path& path, const TriField& field);
TriField read_trifield(const fs::path& path);

// `mrtrivec 1` / `len n` / `vx vy` per line.
void write_trivec(std::ostream& out, const TriVec2& field);
TriVec2 read_trivec(std::istream& in);
void write_trivec(const fs::path& path, const TriVec2& field);
TriVec2 read_trivec(const fs::path& path);

// `mrdata 1` / `triangles n` / `noise <level> <seed|none>` / `lap1 lap2` per line.
void write_data(std::ostream& out, const LaplacianBzData& data);
LaplacianBzData read_data(std::istream& in);
void write_data(const fs::path& path, const LaplacianBzData& data);
LaplacianBzData read_data(const fs::path& path);

// Reduced space: `mrspace 1` manifest naming the drive, N, and the field files
// of the lifting and of each basis function (paths relative to the manifest).
void write_space(const fs::path& path, const ReducedSpace& space);
ReducedSpace read_space(const fs::path& path, const Mesh& mesh);

// Ordered `key value` lines; values may contain spaces.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(const fs::path& path, const KeyValues& entries);
KeyValues read_key_values(const fs::path& path);
const std::string* find_value(const KeyValues& entries, std::string_view key);

KeyValues result_manifest(const ReconstructionResult& result);
KeyValues result_manifest(const RbzResult& result);

// `iteration,diff` per conductivity update.
void write_iteration_csv(const fs::path& path, const ReconstructionResult& result);
// `iteration,delta1,delta2,after_enrichment` per estimator evaluation.
void write_estimator_csv(const fs::path& path, const RbzResult& result);

// Git blob hash ("blob <size>\0" + content) of a file, lowercase hex.
std::string git_blob_sha1(const fs::path& path);
std::string git_blob_sha1_bytes(std::string_view content);

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  double wall_ms = 0.0;
  std::string status;

  nlohmann::json to_json() const;  // inputs carry their content hashes
  void write(const fs::path& path) const;
};

}  // namespace mreit

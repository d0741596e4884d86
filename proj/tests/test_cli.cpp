#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kCli = MREIT_CLI_PATH;

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "mreit-unit-cli";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = kCli.string() + " " + args + " > " + (workdir() / "stdout.txt").string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out_dir(const std::string& name) { return (workdir() / name).string(); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(run("") == 1);
  CHECK(run("synth --no-such-flag") == 1);
  CHECK(run("reconstruct") == 1);
  CHECK(run("reconstruct --data x --algo nope") == 1);
  CHECK(run("synth --n 4 --halfwidth 1.5 --out-dir " + out_dir("bad")) == 1);
}

TEST_CASE("missing inputs exit 2") {
  CHECK(run("--mesh /nonexistent/mesh.txt reconstruct --data /nonexistent/d.data") == 2);
  CHECK(run("--mesh /nonexistent/mesh.txt render /nonexistent/f.field out.pgm") == 2);
  CHECK(run("metrics /nonexistent/a.field /nonexistent/b.field") == 2);
}

TEST_CASE("zero data reconstructs the constant background") {
  const std::string dir = out_dir("const");
  REQUIRE(run("--out-dir " + dir + " synth --n 20 --phantom constant") == 0);
  for (const char* f : {"mesh.txt", "sigma_star.field", "data_clean.data", "synth_manifest.json"}) {
    CHECK(fs::exists(fs::path(dir) / f));
  }
  REQUIRE(run("--out-dir " + dir + " --mesh " + dir + "/mesh.txt reconstruct --data " + dir +
              "/data_clean.data") == 0);
  const std::string result = slurp(fs::path(dir) / "bz_result.txt");
  CHECK(result.find("iterations 1\n") != std::string::npos);
  CHECK(result.find("status converged\n") != std::string::npos);
  CHECK(slurp(fs::path(dir) / "bz_iterations.csv") == "iteration,diff\n1,0\n");

  REQUIRE(run("--out-dir " + dir + " --mesh " + dir + "/mesh.txt reconstruct --algo rbz --data " + dir +
              "/data_clean.data") == 0);
  CHECK(fs::exists(fs::path(dir) / "rbz_estimators.csv"));

  REQUIRE(run("--out-dir " + dir + " --mesh " + dir + "/mesh.txt render " + dir + "/bz_sigma.field img.pgm"
              " --width 16 --height 8") == 0);
  const std::string pgm = slurp(fs::path(dir) / "img.pgm");
  CHECK(pgm.substr(0, 12) == "P5\n16 8\n255\n");
  CHECK(pgm.size() == 12u + 128u);

  REQUIRE(run("metrics " + dir + "/bz_sigma.field --reference " + dir + "/sigma_star.field --json " + dir +
              "/m.json") == 0);
  CHECK(fs::exists(fs::path(dir) / "m.json"));
}

TEST_CASE("noisy synthesis is reproducible per seed") {
  const std::string a = out_dir("seed_a"), b = out_dir("seed_b"), c = out_dir("seed_c");
  const std::string args = " synth --n 20 --phantom smooth --noise 0.05";
  REQUIRE(run("--seed 11 --out-dir " + a + args) == 0);
  REQUIRE(run("--seed 11 --out-dir " + b + args) == 0);
  REQUIRE(run("--seed 12 --out-dir " + c + args) == 0);
  CHECK(slurp(fs::path(a) / "data_noisy.data") == slurp(fs::path(b) / "data_noisy.data"));
  CHECK(slurp(fs::path(a) / "data_noisy.data") != slurp(fs::path(c) / "data_noisy.data"));
  CHECK(slurp(fs::path(a) / "data_clean.data") == slurp(fs::path(c) / "data_clean.data"));
}

TEST_CASE("iteration cap exits 4") {
  const std::string dir = out_dir("cap");
  REQUIRE(run("--out-dir " + dir + " synth --n 20 --phantom smooth") == 0);
  CHECK(run("--out-dir " + dir + " --mesh " + dir + "/mesh.txt reconstruct --max-iter 1 --data " + dir +
            "/data_clean.data") == 4);
  CHECK(slurp(fs::path(dir) / "bz_result.txt").find("status max_iterations") != std::string::npos);
}

TEST_CASE("selftest passes") { CHECK(run("selftest") == 0); }

}

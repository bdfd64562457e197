#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config(const char* name) { return std::string(CVSYNTH_CONFIG_DIR) + "/" + name; }

const fs::path kScratchRoot = fs::temp_directory_path() / ("cvsynth_cli_test_" + std::to_string(::getpid()));

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(kScratchRoot, ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  const fs::path dir = kScratchRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI with stdout and stderr captured in dir/log.txt; returns the exit code.
int run(const fs::path& dir, const std::string& args) {
  const std::string cmd =
      std::string("\"") + CVSYNTH_CLI_PATH + "\" " + args + " > \"" + (dir / "log.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string out_args(const fs::path& dir) { return "--out \"" + dir.string() + "\""; }

// First data row after the comment and header lines.
std::string first_row(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    return line;
  }
  return {};
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  return rows == 0 ? 0 : rows - 1;
}

}  // namespace

TEST_CASE("riccati on the scalar demo") {
  const fs::path dir = scratch("riccati");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " riccati") == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  const std::string P = slurp(dir / "P.csv");
  CHECK(P.rfind("# manifest: ", 0) == 0);
  const std::string row = first_row(P);
  const double p0 = std::stod(row.substr(row.find(',') + 1));
  CHECK(std::abs(p0 - (std::sqrt(3.0) - 1.0) / 2.0) < 1e-6);
  const json cert = json::parse(slurp(dir / "certificate.json"));
  CHECK(cert["achieved_gap"].get<double>() <= cert["tol"].get<double>());
}

TEST_CASE("zero horizon gives a single zero row") {
  const fs::path dir = scratch("zero_horizon");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " riccati --horizon 0") == 0);
  const std::string P = slurp(dir / "P.csv");
  CHECK(data_rows(P) == 1);
  CHECK(first_row(P) == "0,0");
}

TEST_CASE("malformed config names the offending key") {
  const fs::path dir = scratch("malformed");
  json c = json::parse(slurp(config("scalar_demo.json")));
  c.erase("omega");
  std::ofstream(dir / "bad.json") << c.dump();
  CHECK(run(dir, "--config \"" + (dir / "bad.json").string() + "\" " + out_args(dir) + " riccati") == 1);
  CHECK(slurp(dir / "log.txt").find("omega") != std::string::npos);
  std::ofstream(dir / "broken.json") << "{\"dims\": ";
  CHECK(run(dir, "--config \"" + (dir / "broken.json").string() + "\" " + out_args(dir) + " riccati") == 1);
  CHECK(run(dir, "--config /nonexistent.json riccati") == 1);
}

TEST_CASE("missing stabilizing limit exits with code 2") {
  const fs::path dir = scratch("no_convergence");
  json c = json::parse(slurp(config("outward_drift.json")));
  c["K"] = {{"variant", "step"}, {"params", {{"value", 2.0}}}};
  c["grid"]["T_max"] = 20.0;
  std::ofstream(dir / "unstable.json") << c.dump();
  CHECK(run(dir, "--config \"" + (dir / "unstable.json").string() + "\" " + out_args(dir) + " riccati") == 2);
}

TEST_CASE("synthesize on the scalar demo") {
  const fs::path dir = scratch("synthesize");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " synthesize --x0 0.9 --check-ipc") == 0);
  const json v = json::parse(slurp(dir / "value.json"));
  CHECK(v["rel_gap"].get<double>() <= 1e-3);
  CHECK(v["verified"] == true);
  CHECK(v["constraint_violation"] == false);
  CHECK(json::parse(slurp(dir / "ipc.json"))["worst_margin"].get<double>() > 0.0);
  CHECK(data_rows(slurp(dir / "trajectory.csv")) > 100);
}

TEST_CASE("synthesize rejects an initial state outside the set") {
  const fs::path dir = scratch("outside");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " synthesize --x0 1.5") == 1);
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " synthesize --x0 0.1,0.2") == 1);
}

TEST_CASE("outward drift is reported as unverified") {
  const fs::path dir = scratch("drift");
  CHECK(run(dir, "--config " + config("outward_drift.json") + " " + out_args(dir) +
                     " synthesize --x0 0.5 --zero-feedback --check-ipc") == 3);
  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.find("# ConstraintViolation") != std::string::npos);
  const json v = json::parse(slurp(dir / "value.json"));
  CHECK(v["verified"] == false);
  CHECK(std::abs(v["exit_time"].get<double>() - std::log(2.0)) < 0.02);
}

TEST_CASE("game writes its files and flags non-convergence") {
  const fs::path dir = scratch("game");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " --jobs 2 game --x0 0.8") == 0);
  const json g = json::parse(slurp(dir / "game.json"));
  CHECK(g["converged"] == true);
  for (const char* f : {"sweep.csv", "alpha.csv", "xi.csv", "manifest.json"}) CHECK(fs::exists(dir / f));
  CHECK(data_rows(slurp(dir / "sweep.csv")) == 11);
  const fs::path stuck = scratch("game_stuck");
  CHECK(run(stuck, "--config " + config("scalar_demo.json") + " " + out_args(stuck) + " game --x0 0.8 --max-iter 1") == 4);
  CHECK(json::parse(slurp(stuck / "game.json"))["converged"] == false);
}

TEST_CASE("verify suites and exit codes") {
  const fs::path dir = scratch("verify");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " verify --suite riccati") == 0);
  CHECK(json::parse(slurp(dir / "verify.json"))["pass"] == true);
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " verify --suite bogus") == 1);
}

TEST_CASE("hjb suite keeps its order with a doubled step") {
  const fs::path dir = scratch("hjb");
  CHECK(run(dir, "--config " + config("scalar_demo.json") + " " + out_args(dir) + " --dt 0.02 verify --suite hjb") == 0);
}

TEST_CASE("outputs are byte-identical across runs") {
  const fs::path dir = scratch("determinism");
  const std::string args =
      "--config " + config("scalar_demo.json") + " " + out_args(dir / "run") + " --jobs 3 synthesize --x0 0.7 --check-ipc";
  const char* files[] = {"manifest.json", "value.json", "trajectory.csv", "ipc.json"};
  REQUIRE(run(dir, args) == 0);
  std::string first[4];
  for (int i = 0; i < 4; ++i) first[i] = slurp(dir / "run" / files[i]);
  REQUIRE(run(dir, args) == 0);
  for (int i = 0; i < 4; ++i) CHECK(slurp(dir / "run" / files[i]) == first[i]);
}

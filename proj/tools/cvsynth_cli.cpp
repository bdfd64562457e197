// Command-line front end over the C API: riccati | synthesize | game | verify.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvsynth/cvsynth.h"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit {
  kOk = 0,
  kConfig = 1,
  kNoConvergence = 2,
  kUnverifiedIpc = 3,
  kNoFixedPoint = 4,
  kFailure = 5,
};

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(cvs_status status) {
  if (cvs_status_is_config_error(status)) return kConfig;
  switch (status) {
    case CVS_IO:
    case CVS_INFEASIBLE_STATE:
      return kConfig;
    case CVS_NO_CONVERGENCE:
    case CVS_NOT_STABILIZABLE:
      return kNoConvergence;
    case CVS_NO_FIXED_POINT:
      return kNoFixedPoint;
    default:
      return kFailure;
  }
}

void check(cvs_status status, const std::string& what) {
  if (status != CVS_OK) throw Failure{exit_code_for(status), what + ": " + cvs_last_error()};
}

struct Deleter {
  void operator()(cvs_problem* p) const { cvs_problem_free(p); }
  void operator()(cvs_alpha* a) const { cvs_alpha_free(a); }
  void operator()(cvs_riccati* r) const { cvs_riccati_free(r); }
  void operator()(cvs_trajectory* t) const { cvs_trajectory_free(t); }
  void operator()(cvs_game* g) const { cvs_game_free(g); }
  void operator()(char* s) const { cvs_string_free(s); }
};
template <class T>
using Handle = std::unique_ptr<T, Deleter>;

std::string take(char* s) {
  Handle<char> owned(s);
  return s == nullptr ? std::string() : std::string(s);
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Failure{kFailure, "SHA-256 computation failed"};
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kConfig, "cannot read " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{kFailure, "cannot write " + path.string()};
  out << content;
}

struct Globals {
  std::string config;
  std::string out = "out";
  int jobs = 1;
  std::uint64_t seed = 1;
  double dt = 0.0;
};

struct Session {
  Handle<cvs_problem> problem;
  std::string manifest_hash;
  fs::path out;
  double t0 = 0.0;
  double dt = 0.0;
  double horizon = 0.0;
  int n = 0;
  int m = 0;
};

// Loads the problem, writes manifest.json and returns its hash.
Session open_session(const Globals& g, const std::string& command, ordered_json parameters,
                     ordered_json tolerances) {
  Session session;
  const std::string text = read_file(g.config);
  cvs_problem* raw = nullptr;
  check(cvs_problem_parse(text.c_str(), &raw), "config " + g.config);
  session.problem.reset(raw);
  if (g.dt > 0.0) check(cvs_problem_set_dt(raw, g.dt), "--dt");
  cvs_set_num_threads(g.jobs);
  double t_max = 0.0;
  cvs_problem_grid(raw, &session.t0, &session.dt, &session.horizon, &t_max);
  cvs_problem_dims(raw, &session.n, &session.m);

  session.out = g.out;
  std::error_code ec;
  fs::create_directories(session.out, ec);
  if (ec) throw Failure{kFailure, "cannot create output directory " + g.out + ": " + ec.message()};

  ordered_json manifest;
  manifest["tool"] = "cvsynth";
  manifest["version"] = cvs_version();
  manifest["command"] = command;
  manifest["config_path"] = g.config;
  manifest["config_sha256"] = sha256_hex(text);
  manifest["output_directory"] = g.out;
  ordered_json overrides;
  overrides["dt"] = g.dt > 0.0 ? ordered_json(g.dt) : ordered_json(nullptr);
  overrides["jobs"] = g.jobs;
  overrides["seed"] = g.seed;
  manifest["overrides"] = overrides;
  manifest["parameters"] = std::move(parameters);
  manifest["tolerances"] = std::move(tolerances);
  manifest["problem"] = ordered_json::parse(take([&] {
    char* s = nullptr;
    check(cvs_problem_describe(raw, &s), "describe");
    return s;
  }()));
  const std::string body = manifest.dump(2) + "\n";
  write_file(session.out / "manifest.json", body);
  session.manifest_hash = sha256_hex(body);
  return session;
}

Handle<cvs_alpha> parse_alpha(const std::string& spec) {
  cvs_alpha* raw = nullptr;
  try {
    std::size_t used = 0;
    const double value = std::stod(spec, &used);
    if (used == spec.size()) {
      check(cvs_alpha_constant(value, &raw), "--alpha");
      return Handle<cvs_alpha>(raw);
    }
  } catch (const std::logic_error&) {
  }
  check(cvs_alpha_load_csv(spec.c_str(), &raw), "--alpha");
  return Handle<cvs_alpha>(raw);
}

std::vector<double> require_x0(const Session& s, const std::vector<double>& x0) {
  if (static_cast<int>(x0.size()) != s.n) {
    throw Failure{kConfig, "--x0 needs " + std::to_string(s.n) + " comma-separated values"};
  }
  int inside = 0;
  check(cvs_problem_contains(s.problem.get(), x0.data(), &inside), "--x0");
  if (!inside) throw Failure{kConfig, "--x0 lies outside Omega"};
  return x0;
}

double rel_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

struct RiccatiArgs {
  std::string alpha = "0";
  std::string horizon = "stabilizing";
  double tol = 1e-10;
};

int cmd_riccati(const Globals& g, const RiccatiArgs& a) {
  ordered_json params;
  params["alpha"] = a.alpha;
  params["horizon"] = a.horizon;
  ordered_json tols;
  tols["stabilizing_tol"] = a.tol;
  Session s = open_session(g, "riccati", params, tols);
  Handle<cvs_alpha> alpha = parse_alpha(a.alpha);
  cvs_riccati* raw = nullptr;
  if (a.horizon == "stabilizing") {
    check(cvs_riccati_stabilizing(s.problem.get(), alpha.get(), s.t0, s.t0 + s.horizon, a.tol, &raw),
          "stabilizing solve");
  } else {
    double T = 0.0;
    try {
      T = std::stod(a.horizon);
    } catch (const std::logic_error&) {
      throw Failure{kConfig, "--horizon must be a number or 'stabilizing'"};
    }
    check(cvs_riccati_finite(s.problem.get(), alpha.get(), s.t0, s.t0 + T, &raw), "finite-horizon solve");
  }
  Handle<cvs_riccati> P(raw);
  char* text = nullptr;
  check(cvs_riccati_csv(P.get(), s.manifest_hash.c_str(), &text), "P csv");
  write_file(s.out / "P.csv", take(text));
  check(cvs_riccati_certificate_json(P.get(), &text), "certificate");
  ordered_json cert = ordered_json::parse(take(text));
  cert["manifest"] = s.manifest_hash;
  write_file(s.out / "certificate.json", cert.dump(2) + "\n");
  return kOk;
}

struct SynthArgs {
  std::vector<double> x0;
  bool check_ipc = false;
  bool zero_feedback = false;
  double tol = 1e-10;
  std::size_t density = 64;
  std::size_t time_samples = 21;
};

int cmd_synthesize(const Globals& g, const SynthArgs& a) {
  ordered_json params;
  params["x0"] = a.x0;
  params["check_ipc"] = a.check_ipc;
  params["zero_feedback"] = a.zero_feedback;
  ordered_json tols;
  tols["stabilizing_tol"] = a.tol;
  tols["ipc_density"] = a.density;
  tols["ipc_time_samples"] = a.time_samples;
  Session s = open_session(g, "synthesize", params, tols);
  const std::vector<double> x0 = require_x0(s, a.x0);
  Handle<cvs_alpha> alpha = parse_alpha("0");

  cvs_riccati* raw = nullptr;
  const double T_end = s.t0 + s.horizon;
  if (a.zero_feedback) {
    check(cvs_riccati_zero(s.problem.get(), s.t0, T_end, &raw), "zero surrogate");
  } else {
    check(cvs_riccati_stabilizing(s.problem.get(), alpha.get(), s.t0, T_end, a.tol, &raw), "stabilizing solve");
  }
  Handle<cvs_riccati> P(raw);
  char* text = nullptr;
  check(cvs_riccati_csv(P.get(), s.manifest_hash.c_str(), &text), "P csv");
  write_file(s.out / "P.csv", take(text));

  bool verified = true;
  if (a.check_ipc) {
    int holds = 0;
    check(cvs_ipc_check(s.problem.get(), P.get(), a.time_samples, a.density, &holds, &text), "IPC check");
    ordered_json ipc = ordered_json::parse(take(text));
    ipc["manifest"] = s.manifest_hash;
    write_file(s.out / "ipc.json", ipc.dump(2) + "\n");
    verified = holds != 0;
  }

  cvs_trajectory* traj_raw = nullptr;
  check(cvs_simulate(s.problem.get(), P.get(), alpha.get(), s.t0, x0.data(), s.horizon, &traj_raw), "simulation");
  Handle<cvs_trajectory> traj(traj_raw);
  check(cvs_trajectory_csv(traj.get(), s.manifest_hash.c_str(), &text), "trajectory csv");
  write_file(s.out / "trajectory.csv", take(text));

  double value = 0.0;
  double truncated = 0.0;
  double tail = 0.0;
  check(cvs_value(s.problem.get(), P.get(), alpha.get(), s.t0, x0.data(), &value), "value");
  check(cvs_trajectory_cost(s.problem.get(), traj.get(), alpha.get(), P.get(), &truncated, &tail), "cost");
  int violated = 0;
  double exit_time = 0.0;
  cvs_trajectory_exit_time(traj.get(), &violated, &exit_time);

  ordered_json report;
  report["manifest"] = s.manifest_hash;
  report["value"] = value;
  report["truncated_cost"] = truncated;
  report["tail"] = tail;
  report["rel_gap"] = rel_gap(truncated + tail, value);
  report["ipc_checked"] = a.check_ipc;
  report["verified"] = verified && !violated;
  report["constraint_violation"] = violated != 0;
  report["exit_time"] = violated ? ordered_json(exit_time) : ordered_json(nullptr);
  write_file(s.out / "value.json", report.dump(2) + "\n");
  if (!verified || violated) {
    std::cerr << "synthesis unverified:" << (verified ? "" : " IPC check failed;")
              << (violated ? " trajectory left Omega" : "") << '\n';
    return kUnverifiedIpc;
  }
  return kOk;
}

struct GameArgs {
  std::vector<double> x0;
  double tol = 1e-6;
  int max_iter = 50;
  double relaxation = 0.5;
  double horizon = 0.0;
  std::vector<double> alpha_grid;
  double window = 0.0;
};

int cmd_game(const Globals& g, GameArgs a) {
  if (a.alpha_grid.empty()) {
    for (int k = 0; k <= 10; ++k) a.alpha_grid.push_back(0.2 * k);
  }
  ordered_json params;
  params["x0"] = a.x0;
  params["max_iter"] = a.max_iter;
  params["relaxation"] = a.relaxation;
  params["alpha_grid"] = a.alpha_grid;
  ordered_json tols;
  tols["fixed_point_tol"] = a.tol;
  tols["stabilizing_tol"] = 1e-10;
  Session s = open_session(g, "game", params, tols);
  const std::vector<double> x0 = require_x0(s, a.x0);
  const double horizon = a.horizon > 0.0 ? a.horizon : s.horizon;
  const double window = a.window > 0.0 ? a.window : horizon;

  cvs_game* raw = nullptr;
  check(cvs_game_solve(s.problem.get(), s.t0, x0.data(), a.tol, a.max_iter, a.relaxation, horizon, &raw),
        "coupled solve");
  Handle<cvs_game> game(raw);
  char* text = nullptr;
  check(cvs_game_json(game.get(), &text), "game json");
  ordered_json report = ordered_json::parse(take(text));

  double W_lower = 0.0;
  double best = 0.0;
  check(cvs_constant_alpha_sweep(s.problem.get(), s.t0, x0.data(), a.alpha_grid.data(), a.alpha_grid.size(),
                                 window, &W_lower, &best, s.manifest_hash.c_str(), &text),
        "constant-alpha sweep");
  write_file(s.out / "sweep.csv", take(text));
  report["constant_alpha_lower_bound"] = W_lower;
  report["constant_alpha_best"] = best;
  report["constant_alpha_window"] = window;
  report["manifest"] = s.manifest_hash;
  write_file(s.out / "game.json", report.dump(2) + "\n");
  check(cvs_game_alpha_csv(game.get(), s.manifest_hash.c_str(), &text), "alpha csv");
  write_file(s.out / "alpha.csv", take(text));
  check(cvs_game_trajectory_csv(game.get(), s.manifest_hash.c_str(), &text), "trajectory csv");
  write_file(s.out / "xi.csv", take(text));

  int converged = 0;
  cvs_game_result(game.get(), nullptr, nullptr, nullptr, &converged);
  if (!converged) {
    std::cerr << "NoFixedPoint: alpha iteration did not reach the tolerance; last iterate written\n";
    return kNoFixedPoint;
  }
  return kOk;
}

int cmd_verify(const Globals& g, const std::string& suite) {
  ordered_json params;
  params["suite"] = suite;
  Session s = open_session(g, "verify", params, ordered_json::object());
  int pass = 0;
  char* text = nullptr;
  check(cvs_verify(s.problem.get(), suite.c_str(), g.seed, &pass, &text), "verify");
  const std::string report = take(text);
  write_file(s.out / "verify.json", report);
  std::cout << report;
  return pass ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained value synthesis: Riccati feedback, inward-pointing checks, game solver"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Problem configuration (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for random probe points")->capture_default_str();
  app.add_option("--dt", g.dt, "Override grid.dt")->check(CLI::PositiveNumber);

  RiccatiArgs ra;
  auto* riccati = app.add_subcommand("riccati", "Solve the Riccati equation and write P(s)");
  riccati->add_option("--alpha", ra.alpha, "Constant alpha or CSV file with s,alpha")->capture_default_str();
  riccati->add_option("--horizon", ra.horizon, "Horizon length T - t, or 'stabilizing'")->capture_default_str();
  riccati->add_option("--tol", ra.tol, "Stabilizing sweep tolerance")->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "Closed-loop synthesis with value/cost comparison");
  synth->add_option("--x0", sa.x0, "Initial state, comma separated")->required()->delimiter(',');
  synth->add_flag("--check-ipc", sa.check_ipc, "Run the inward-pointing check");
  synth->add_flag("--zero-feedback", sa.zero_feedback, "Use the open-loop surrogate P = 0");
  synth->add_option("--tol", sa.tol, "Stabilizing sweep tolerance")->capture_default_str();
  synth->add_option("--density", sa.density, "Boundary sampling density")->capture_default_str();
  synth->add_option("--time-samples", sa.time_samples, "Time samples of the IPC check")->capture_default_str();

  GameArgs ga;
  auto* game = app.add_subcommand("game", "Coupled fixed point for the outer player");
  game->add_option("--x0", ga.x0, "Initial state, comma separated")->required()->delimiter(',');
  game->add_option("--tol", ga.tol, "Alpha update tolerance")->capture_default_str();
  game->add_option("--max-iter", ga.max_iter, "Iteration cap")->capture_default_str();
  game->add_option("--relaxation", ga.relaxation, "Picard relaxation in (0, 1]")->capture_default_str();
  game->add_option("--horizon", ga.horizon, "Horizon carrying alpha (default grid.horizon)");
  game->add_option("--alpha-grid", ga.alpha_grid, "Constant-alpha sweep values")->delimiter(',');
  game->add_option("--window", ga.window, "Window of the constant-alpha policies (default horizon)");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "Run verification suites and print a JSON report");
  verify->add_option("--suite", suite, "riccati | ipc | hjb | oracle | all")
      ->check(CLI::IsMember({"riccati", "ipc", "hjb", "oracle", "all"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (riccati->parsed()) return cmd_riccati(g, ra);
    if (synth->parsed()) return cmd_synthesize(g, sa);
    if (game->parsed()) return cmd_game(g, ga);
    return cmd_verify(g, suite);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

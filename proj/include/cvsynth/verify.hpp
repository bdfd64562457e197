#pragma once

#include <cstdint>
#include <string>

#include "cvsynth/model.hpp"
#include "cvsynth/report.hpp"

namespace cvsynth {

struct VerifyOptions {
  int jobs = 1;
  std::uint64_t seed = 1;
  double riccati_tol = 1e-10;
  std::size_t ipc_density = 64;
  std::size_t ipc_time_samples = 21;
  /// Number of closed-loop simulations used by the feasibility check.
  std::size_t feasibility_runs = 50;
};

/// True for riccati, ipc, hjb, oracle and all.
bool is_known_suite(const std::string& suite);

/// Runs one suite (or all) on the problem and returns a deterministic report
/// {"suite", "checks": [{"name", "pass", ...}], "pass"}. Unknown suite names
/// throw InvalidValue.
ordered_json run_verify(const ProblemSpec& spec, const std::string& suite, const VerifyOptions& options = {});

}  // namespace cvsynth

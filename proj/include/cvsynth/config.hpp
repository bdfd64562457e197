#pragma once

#include <string>

#include <json.hpp>

#include "cvsynth/model.hpp"

namespace cvsynth {

/// Builds and validates a ProblemSpec from the JSON problem document
/// (top-level keys dims, A, B, K, a, b, h, omega, grid; optional R). Every
/// function is {"variant": name, "params": {...}}; see schema/problem.schema.json.
ProblemSpec build_problem(const nlohmann::json& config);
ProblemSpec build_problem_from_text(const std::string& text);
ProblemSpec load_problem(const std::string& path);

/// Serializes the grid and catalog choices back to JSON (used by manifests).
nlohmann::json describe_problem(const ProblemSpec& spec);

}  // namespace cvsynth

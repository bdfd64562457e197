#pragma once

#include <string>

#include <json.hpp>

#include "cvsynth/game.hpp"
#include "cvsynth/ipc.hpp"
#include "cvsynth/oracle.hpp"
#include "cvsynth/riccati.hpp"
#include "cvsynth/synthesis.hpp"

namespace cvsynth {

using ordered_json = nlohmann::ordered_json;

/// Round-trip decimal form ("%.17g"); "inf", "-inf", "nan" for non-finite values.
std::string format_number(double v);

// CSV writers. A non-empty manifest hash adds a leading "# manifest: <hash>"
// line; the column header always follows.
std::string riccati_csv(const RiccatiSolution& P, const std::string& manifest = {});
std::string trajectory_csv(const Trajectory& traj, const std::string& manifest = {});
std::string alpha_csv(const Trajectory& traj, const std::string& manifest = {});
std::string sweep_csv(const ConstantAlphaSweep& sweep, const std::string& manifest = {});
std::string value_table_csv(const DPValueTable& table, const std::string& manifest = {});

ordered_json certificate_json(const RiccatiSolution& P);
ordered_json ipc_json(const IpcReport& report);
ordered_json geometric_json(const GeometricReport& report);
ordered_json game_json(const GameSolution& sol);
ordered_json trajectory_summary_json(const Trajectory& traj);
ordered_json vector_json(const Vector& v);

}  // namespace cvsynth

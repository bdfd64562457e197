#include "cvsynth/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cvsynth {

namespace {

void begin(std::ostringstream& out, const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string riccati_csv(const RiccatiSolution& P, const std::string& manifest) {
  std::ostringstream out;
  begin(out, manifest);
  const Eigen::Index n = P.dim();
  out << 's';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out << ",P_" << i + 1 << '_' << j + 1;
  }
  out << '\n';
  for (std::size_t k = 0; k < P.values().size(); ++k) {
    out << format_number(P.grid().node(k));
    const SymMatrix& M = P.values()[k];
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) out << ',' << format_number(M(i, j));
    }
    out << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj, const std::string& manifest) {
  std::ostringstream out;
  begin(out, manifest);
  const Eigen::Index n = traj.xi.empty() ? 0 : traj.xi.front().size();
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();
  if (traj.exit_time) out << "# ConstraintViolation: exit_time " << format_number(*traj.exit_time) << '\n';
  out << 's';
  for (Eigen::Index i = 0; i < n; ++i) out << ",xi_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u_" << i + 1;
  out << ",running_cost,cum_cost,omega_margin\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.s[k]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(traj.xi[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_number(traj.u[k][i]);
    out << ',' << format_number(traj.running_cost[k]) << ',' << format_number(traj.cum_cost[k]) << ','
        << format_number(traj.omega_margin[k]) << '\n';
  }
  return out.str();
}

std::string alpha_csv(const Trajectory& traj, const std::string& manifest) {
  std::ostringstream out;
  begin(out, manifest);
  out << "s,alpha\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << format_number(traj.s[k]) << ',' << format_number(traj.alpha[k]) << '\n';
  }
  return out.str();
}

std::string sweep_csv(const ConstantAlphaSweep& sweep, const std::string& manifest) {
  std::ostringstream out;
  begin(out, manifest);
  out << "alpha,value,ok\n";
  for (const auto& e : sweep.entries) {
    out << format_number(e.alpha) << ',' << format_number(e.value) << ',' << (e.ok ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string value_table_csv(const DPValueTable& table, const std::string& manifest) {
  std::ostringstream out;
  begin(out, manifest);
  out << 's';
  for (std::size_t k = 0; k < table.axes.size(); ++k) out << ",x_" << k + 1;
  out << ",V\n";
  const std::size_t count = table.state_count();
  for (std::size_t stage = 0; stage < table.values.size(); ++stage) {
    const std::string s = format_number(table.grid.node(stage));
    for (std::size_t j = 0; j < count; ++j) {
      out << s;
      const Vector x = table.state(j);
      for (Eigen::Index k = 0; k < x.size(); ++k) out << ',' << format_number(x[k]);
      out << ',' << format_number(table.values[stage][j]) << '\n';
    }
  }
  return out.str();
}

ordered_json vector_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number(v[i]));
  return arr;
}

ordered_json certificate_json(const RiccatiSolution& P) {
  ordered_json j;
  j["kind"] = P.kind() == RiccatiSolution::Kind::Stabilizing
                  ? "stabilizing"
                  : (P.kind() == RiccatiSolution::Kind::FiniteHorizon ? "finite_horizon" : "prescribed");
  j["t0"] = P.grid().t0();
  j["t_end"] = P.grid().t_end();
  j["dt"] = P.grid().dt();
  j["nodes"] = P.grid().size();
  if (const auto& cert = P.certificate()) {
    ordered_json horizons = ordered_json::array();
    ordered_json gaps = ordered_json::array();
    for (double h : cert->horizons) horizons.push_back(h);
    for (double g : cert->gaps) gaps.push_back(number(g));
    j["horizons"] = horizons;
    j["gaps"] = gaps;
    j["achieved_gap"] = number(cert->achieved_gap);
    j["tol"] = cert->tol;
    j["converged"] = cert->achieved_gap < cert->tol;
  }
  const StructuralReport st = structural_check(P);
  j["max_asymmetry"] = st.max_asymmetry;
  j["min_eigenvalue"] = st.min_eigenvalue;
  return j;
}

ordered_json ipc_json(const IpcReport& r) {
  ordered_json j;
  j["worst_margin"] = number(r.worst_margin);
  j["witness_s"] = r.witness_s;
  j["witness_x"] = vector_json(r.witness_x);
  j["n_samples"] = r.n_samples;
  j["density"] = r.density;
  j["time_samples"] = r.time_samples;
  j["flow_worst_margin"] = number(r.flow_worst_margin);
  j["flow_witness_s"] = r.flow_witness_s;
  j["flow_witness_x"] = vector_json(r.flow_witness_x);
  j["holds"] = r.holds();
  return j;
}

ordered_json geometric_json(const GeometricReport& r) {
  ordered_json j;
  j["holds"] = r.holds;
  j["raw_inclusion"] = r.raw_inclusion;
  j["worst_raw_slack"] = number(r.worst_raw_slack);
  j["rho"] = number(r.rho);
  j["theta"] = number(r.theta);
  j["disagreement"] = r.disagreement;
  j["n_samples"] = r.n_samples;
  return j;
}

ordered_json game_json(const GameSolution& sol) {
  ordered_json j;
  j["W"] = number(sol.W);
  j["iterations"] = sol.iterations;
  j["alpha_update_norm"] = sol.alpha_update_norm;
  ordered_json alpha = ordered_json::array();
  for (double a : sol.xi_star.alpha) alpha.push_back(a);
  j["alpha_star"] = alpha;
  j["converged"] = sol.converged;
  ordered_json history = ordered_json::array();
  for (double u : sol.update_history) history.push_back(u);
  j["update_history"] = history;
  j["min_interior_margin"] = number(sol.min_interior_margin);
  return j;
}

ordered_json trajectory_summary_json(const Trajectory& traj) {
  ordered_json j;
  j["nodes"] = traj.size();
  j["t_end"] = traj.s.empty() ? 0.0 : traj.s.back();
  j["cum_cost"] = traj.cum_cost.empty() ? 0.0 : traj.cum_cost.back();
  j["violated"] = traj.violated();
  j["exit_time"] = traj.exit_time ? ordered_json(*traj.exit_time) : ordered_json(nullptr);
  return j;
}

}  // namespace cvsynth

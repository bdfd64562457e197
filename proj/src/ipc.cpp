#include "cvsynth/ipc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cvsynth/error.hpp"
#include "cvsynth/parallel.hpp"

namespace cvsynth {

double check_base_ipc(const ProblemSpec& spec, double s, const ConeQuery& q, double u_max,
                      std::size_t resolution) {
  const Eigen::Index m = spec.dim_control;
  const Vector& x = q.point;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& u) { best = std::max(best, q.margin(eval_dynamics(spec, s, x, u))); };

  consider(Vector::Zero(m));
  // Steepest inward control for the aggregated normal, clipped to the box.
  if (!q.normals.empty()) {
    Vector n_sum = Vector::Zero(x.size());
    for (const auto& n : q.normals) n_sum += n;
    const Vector dir = spec.B(s).transpose() * spec.h.jacobian_inverse(x).transpose() * n_sum;
    if (dir.norm() > 0.0) consider(Vector(-u_max * dir / dir.cwiseAbs().maxCoeff()));
  }
  // Tensor grid, coarsened so that it stays below ~1e5 points.
  std::size_t res = std::max<std::size_t>(2, resolution);
  while (res > 2 && std::pow(static_cast<double>(res), static_cast<double>(m)) > 1e5) --res;
  std::vector<std::size_t> counter(static_cast<std::size_t>(m), 0);
  while (true) {
    Vector u(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      u[j] = -u_max + 2.0 * u_max * static_cast<double>(counter[static_cast<std::size_t>(j)]) / static_cast<double>(res - 1);
    }
    consider(u);
    std::size_t pos = 0;
    while (pos < counter.size() && ++counter[pos] == res) counter[pos++] = 0;
    if (pos == counter.size()) break;
  }
  return best;
}

Matrix closed_loop_matrix(const ProblemSpec& spec, const RiccatiSolution& P, double s) {
  const Matrix B = spec.B(s);
  return spec.A(s) - spec.r_inverse_scale() * B * B.transpose() * P.at(s).matrix();
}

IpcReport check_ipc_riccati(const ProblemSpec& spec, const RiccatiSolution& P,
                            const std::vector<double>& times,
                            const std::vector<ConeQuery>& boundary, int jobs) {
  if (times.empty() || boundary.empty()) fail(ErrorCode::InvalidValue, "IPC check needs time and boundary samples");
  struct Worst {
    double margin = std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    double flow = std::numeric_limits<double>::infinity();
    std::size_t flow_index = 0;
  };
  std::vector<Worst> per_time(times.size());
  parallel_for(times.size(), jobs, [&](std::size_t k) {
    const Matrix gamma = closed_loop_matrix(spec, P, times[k]);
    Worst w;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      const Vector& x = boundary[i].point;
      const Vector image = gamma * spec.h.forward(x);
      const double margin = boundary[i].margin(spec.h.jacobian(x).transpose() * image);
      const double flow = boundary[i].margin(spec.h.jacobian_inverse(x) * image);
      if (margin < w.margin) {
        w.margin = margin;
        w.index = i;
      }
      if (flow < w.flow) {
        w.flow = flow;
        w.flow_index = i;
      }
    }
    per_time[k] = w;
  });
  IpcReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.flow_worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (per_time[k].margin < report.worst_margin) {
      report.worst_margin = per_time[k].margin;
      report.witness_s = times[k];
      report.witness_x = boundary[per_time[k].index].point;
    }
    if (per_time[k].flow < report.flow_worst_margin) {
      report.flow_worst_margin = per_time[k].flow;
      report.flow_witness_s = times[k];
      report.flow_witness_x = boundary[per_time[k].flow_index].point;
    }
  }
  report.n_samples = times.size() * boundary.size();
  report.time_samples = times.size();
  return report;
}

IpcReport check_ipc_riccati(const ProblemSpec& spec, const RiccatiSolution& P,
                            std::size_t time_samples, std::size_t density, int jobs) {
  if (time_samples == 0) fail(ErrorCode::InvalidValue, "at least one time sample is required");
  const TimeGrid& grid = P.grid();
  std::vector<double> times(time_samples);
  for (std::size_t k = 0; k < time_samples; ++k) {
    times[k] = time_samples == 1 ? grid.t0()
                                 : grid.t0() + (grid.t_end() - grid.t0()) * static_cast<double>(k) /
                                                   static_cast<double>(time_samples - 1);
  }
  times.back() = grid.t_end();
  IpcReport report = check_ipc_riccati(spec, P, times, spec.omega.sample_boundary(density), jobs);
  report.density = density;
  return report;
}

GeometricReport geometric_condition(const ProblemSpec& spec, double delta, std::size_t density) {
  if (!(delta > 0.0)) fail(ErrorCode::InvalidValue, "delta must be positive");
  const DiffeoMap scaled = spec.h.scaled(std::sqrt(delta));
  GeometricReport r;
  r.raw_inclusion = true;
  r.worst_raw_slack = std::numeric_limits<double>::infinity();
  double max_q = -std::numeric_limits<double>::infinity();
  double max_product = 0.0;
  for (const auto& sample : spec.omega.sample_boundary(density)) {
    const Vector& x = sample.point;
    const Matrix J = spec.h.jacobian(x);
    const Vector hx = spec.h.forward(x);
    const Vector scaled_hx = scaled.forward(x);
    const Matrix scaled_inv_t = scaled.jacobian_inverse(x).transpose();
    for (const auto& n : sample.normals) {
      const double slack = delta - (J.transpose() * hx - delta * n).norm();
      r.worst_raw_slack = std::min(r.worst_raw_slack, slack);
      if (!(slack > 0.0)) r.raw_inclusion = false;
      const Vector m = scaled_inv_t * n;
      const double product = m.norm() * (scaled_hx - m).norm();
      max_q = std::max(max_q, product - m.squaredNorm());
      max_product = std::max(max_product, product);
      ++r.n_samples;
    }
  }
  r.rho = -max_q;
  r.theta = max_product;
  r.holds = r.raw_inclusion && r.rho > 0.0;
  r.disagreement = r.raw_inclusion != (r.rho > 0.0);
  return r;
}

double gamma_bar(const ProblemSpec& spec, const AlphaPolicy& alpha, double rho, double theta) {
  if (!(rho > 0.0)) fail(ErrorCode::InvalidValue, "rho must be positive");
  const double k_part = 0.5 * spec.K.integral(0.0, kInfinity);
  if (std::isinf(k_part)) fail(ErrorCode::NotIntegrable, "K is not integrable on the half-line");
  const double a_part = alpha.integral([&](double v) { return spec.a(v); }, 0.0, kInfinity);
  const double c_norm_sq = k_part + a_part;
  return theta * spec.b_norm_bound * spec.b_norm_bound * c_norm_sq / rho;
}

bool check_negative_definite(const Matrix& A, double gamma) {
  const SymMatrix sym(A);
  return eig_sym_extremes(sym).max <= -gamma;
}

}  // namespace cvsynth

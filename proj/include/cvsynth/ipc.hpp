#pragma once

#include <cstddef>
#include <vector>

#include "cvsynth/constraint_set.hpp"
#include "cvsynth/model.hpp"
#include "cvsynth/riccati.hpp"

namespace cvsynth {

/// Best interior-tangent margin of the controlled velocity f(s, x, u) over
/// the box |u_i| <= u_max sampled with `resolution` points per axis. A
/// positive value means some control points strictly into the set at x.
double check_base_ipc(const ProblemSpec& spec, double s, const ConeQuery& boundary_point,
                      double u_max = 10.0, std::size_t resolution = 41);

/// Gamma(s) = A(s) - B(s) R^{-1} B(s)^T P(s).
Matrix closed_loop_matrix(const ProblemSpec& spec, const RiccatiSolution& P, double s);

struct IpcReport {
  /// min over samples of margin(grad h(x)^T Gamma(s) h(x)).
  double worst_margin = 0.0;
  double witness_s = 0.0;
  Vector witness_x;
  /// Same with the closed-loop velocity grad h(x)^{-1} Gamma(s) h(x).
  double flow_worst_margin = 0.0;
  double flow_witness_s = 0.0;
  Vector flow_witness_x;
  std::size_t n_samples = 0;
  std::size_t density = 0;
  std::size_t time_samples = 0;

  /// Both forms of the condition hold on every sample.
  bool holds() const { return worst_margin > 0.0 && flow_worst_margin > 0.0; }
};

/// Inward-pointing check of the Riccati closed loop on `time_samples` evenly
/// spaced times of P's grid and the boundary sample of the given density.
IpcReport check_ipc_riccati(const ProblemSpec& spec, const RiccatiSolution& P,
                            std::size_t time_samples, std::size_t density, int jobs = 1);
IpcReport check_ipc_riccati(const ProblemSpec& spec, const RiccatiSolution& P,
                            const std::vector<double>& times,
                            const std::vector<ConeQuery>& boundary, int jobs = 1);

struct GeometricReport {
  bool holds = false;
  /// |grad h^T h(x) - delta n| < delta at every sample.
  bool raw_inclusion = false;
  double worst_raw_slack = 0.0;
  /// Constants of the rescaled map sqrt(delta) h.
  double rho = 0.0;
  double theta = 0.0;
  /// raw_inclusion and (rho > 0) disagree.
  bool disagreement = false;
  std::size_t n_samples = 0;
};

GeometricReport geometric_condition(const ProblemSpec& spec, double delta, std::size_t density);

/// theta ||B||_inf^2 int_0^inf (K/2 + a(alpha)) ds / rho.
double gamma_bar(const ProblemSpec& spec, const AlphaPolicy& alpha, double rho, double theta);

/// lambda_max((A + A^T) / 2) <= -gamma.
bool check_negative_definite(const Matrix& A, double gamma);

}  // namespace cvsynth

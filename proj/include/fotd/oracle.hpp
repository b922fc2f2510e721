#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fotd/engine.hpp"
#include "fotd/sensitivity_system.hpp"

namespace fotd {

/// Default limit on n * d entries of one full sensitivity ensemble.
inline constexpr double kDefaultMemoryCap = 1e8;

struct OracleOptions {
  Integrator integrator = Integrator::rk4;
  /// Store (or report) every `stride`-th step. The initial state is always included.
  long stride = 10;
  double memory_cap = kDefaultMemoryCap;
};

/// Throws a memory_guard error when the ensemble exceeds the cap.
void check_memory(const Model& model, double memory_cap);

/// Integrates v and V' from V'(t0) = 0 over `steps` steps and calls `visit`
/// at every snapshot.
void for_each_snapshot(const Model& model, double t0, double dt, long steps, const OracleOptions& options,
                       const std::function<void(const EnsembleState&)>& visit);

std::vector<EnsembleState> solve_full_sensitivities(const Model& model, double t0, double t1, double dt,
                                                    const OracleOptions& options = {});

struct OptimalApprox {
  /// Leading left singular vectors (weighted orthonormal).
  Matrix modes;
  /// Right singular vectors scaled by the singular values.
  Matrix coeffs;
  double e_u = 0.0;
  Vector singulars;
};

OptimalApprox optimal_rank_r(const Matrix& sens, Eigen::Index rank, const Vector& weights);

struct ErrorReport {
  double t = 0.0;
  double e = 0.0;
  double e_r = 0.0;
  double e_u = 0.0;
  /// Percentages relative to the norm of V'; NaN when that norm is zero.
  double pct_e = 0.0;
  double pct_er = 0.0;
  double pct_eu = 0.0;
  double energy_pct = 0.0;
  bool pct_defined = true;
  Vector singulars_full;
  Vector singulars_fotd;
};

/// Compares the reduction with the oracle ensemble `sens` (n x d, same layout
/// as U Y^T) taken at time `t_sens`.
ErrorReport error_report(const FotdState& state, const Matrix& sens, double t_sens, double time_tolerance);
/// Same, reusing a weighted truncated SVD of `sens` of rank at least r.
ErrorReport error_report(const FotdState& state, const Matrix& sens, const TruncatedSvd& svd, double t_sens,
                         double time_tolerance);

/// One step of the unforced-mode (OTD) baseline: dU/dt = (I - P) L U and
/// dY/dt = Y <U, L U>^T + <F', U>^T.
FotdState otd_baseline_step(const FotdState& state, const Model& model, double dt,
                            Integrator integrator = Integrator::rk4);

/// Finite-difference probe of parameter `param` restricted to a block of
/// state rows (all rows when `row_count` is negative).
struct FdProbe {
  Eigen::Index param = 0;
  Eigen::Index row_begin = 0;
  Eigen::Index row_count = -1;
  std::string label;
};

struct FdCheckResult {
  double max_relative = 0.0;
  std::vector<double> relative;
  std::vector<std::string> warnings;
};

/// Central differences (v(alpha + h_j e_j) - v(alpha - h_j e_j)) / 2 h_j with
/// h_j = h |alpha_j| (h itself when alpha_j = 0), compared with the oracle V' column j at t_check.
FdCheckResult fd_gradient_check(const Model& model, double h, double t_check, double dt,
                                const std::vector<FdProbe>& probes, Integrator integrator = Integrator::rk4);

}  // namespace fotd

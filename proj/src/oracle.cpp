#include "fotd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fotd {

void check_memory(const Model& model, double memory_cap) {
  const double entries = static_cast<double>(model.state_dim()) * static_cast<double>(model.param_dim());
  if (entries > memory_cap) {
    throw Error(ErrorCode::memory_guard, "full sensitivity ensemble needs " + std::to_string(entries) +
                                             " entries, above the cap of " + std::to_string(memory_cap) +
                                             "; reduce the grid or the parameter count");
  }
}

void for_each_snapshot(const Model& model, double t0, double dt, long steps, const OracleOptions& options,
                       const std::function<void(const EnsembleState&)>& visit) {
  if (options.stride < 1) throw ConfigError("snapshot stride must be at least 1");
  check_memory(model, options.memory_cap);
  const EnsembleStepper stepper(model, dt, options.integrator);
  EnsembleState s = zero_ensemble(model, t0);
  visit(s);
  for (long k = 1; k <= steps; ++k) {
    EnsembleState next = stepper.step(s);
    next.t = t0 + static_cast<double>(k) * dt;
    s = std::move(next);
    if (k % options.stride == 0) visit(s);
  }
}

std::vector<EnsembleState> solve_full_sensitivities(const Model& model, double t0, double t1, double dt,
                                                    const OracleOptions& options) {
  const long steps = std::lround((t1 - t0) / dt);
  if (steps < 0) throw ConfigError("solve_full_sensitivities: t1 precedes t0");
  std::vector<EnsembleState> out;
  for_each_snapshot(model, t0, dt, steps, options, [&](const EnsembleState& s) { out.push_back(s); });
  return out;
}

OptimalApprox optimal_rank_r(const Matrix& sens, Eigen::Index rank, const Vector& weights) {
  const TruncatedSvd svd = truncated_svd(sens, rank, weights);
  OptimalApprox out;
  out.modes = svd.left;
  out.coeffs = svd.right * svd.singular.asDiagonal();
  out.singulars = svd.all_singular;
  const Eigen::Index tail = svd.all_singular.size() - rank;
  out.e_u = tail > 0 ? svd.all_singular.tail(tail).norm() : 0.0;
  return out;
}

ErrorReport error_report(const FotdState& state, const Matrix& sens, double t_sens, double time_tolerance) {
  return error_report(state, sens, truncated_svd(sens, state.rank(), state.basis.weights), t_sens, time_tolerance);
}

ErrorReport error_report(const FotdState& state, const Matrix& sens, const TruncatedSvd& svd, double t_sens,
                         double time_tolerance) {
  if (std::abs(state.t - t_sens) > time_tolerance) {
    throw Error(ErrorCode::dimension_mismatch, "error_report: reduction at t = " + std::to_string(state.t) +
                                                   " but oracle at t = " + std::to_string(t_sens));
  }
  const Vector& w = state.basis.weights;
  const Matrix approx = reconstruct(state);
  if (approx.rows() != sens.rows() || approx.cols() != sens.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "error_report: reduction is " +
                                                   detail::shape(approx.rows(), approx.cols()) + ", oracle is " +
                                                   detail::shape(sens.rows(), sens.cols()));
  }
  const Eigen::Index r = state.rank();
  if (svd.left.cols() < r) throw Error(ErrorCode::dimension_mismatch, "error_report: oracle SVD rank below r");

  const Matrix optimal = svd.left.leftCols(r) * svd.singular.head(r).asDiagonal() * svd.right.leftCols(r).transpose();
  const Eigen::Index tail = svd.all_singular.size() - r;

  ErrorReport rep;
  rep.t = state.t;
  rep.e = weighted_norm(Matrix(sens - approx), w);
  rep.e_r = weighted_norm(Matrix(approx - optimal), w);
  rep.e_u = tail > 0 ? svd.all_singular.tail(tail).norm() : 0.0;
  rep.singulars_full = svd.all_singular;
  rep.singulars_fotd = rank_decomposition(state).singulars;

  const double norm = weighted_norm(sens, w);
  const double total = svd.all_singular.squaredNorm();
  if (norm > 0.0 && total > 0.0) {
    rep.pct_e = 100.0 * rep.e / norm;
    rep.pct_er = 100.0 * rep.e_r / norm;
    rep.pct_eu = 100.0 * rep.e_u / norm;
    rep.energy_pct = std::clamp(100.0 * svd.all_singular.head(r).squaredNorm() / total, 0.0, 100.0);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    rep.pct_defined = false;
    rep.pct_e = rep.pct_er = rep.pct_eu = rep.energy_pct = nan;
  }
  return rep;
}

FotdState otd_baseline_step(const FotdState& state, const Model& model, double dt, Integrator integrator) {
  FotdOptions options;
  options.integrator = integrator;
  options.forced_modes = false;
  return FotdStepper(model, dt, state.rank(), options).step(state);
}

FdCheckResult fd_gradient_check(const Model& model, double h, double t_check, double dt,
                                const std::vector<FdProbe>& probes, Integrator integrator) {
  if (!(h > 0.0)) throw ConfigError("fd_gradient_check: h must be positive");
  const long steps = std::lround(t_check / dt);
  if (steps < 1) throw ConfigError("fd_gradient_check: t_check must span at least one step");

  EnsembleState oracle = zero_ensemble(model);
  {
    const EnsembleStepper stepper(model, dt, integrator);
    for (long k = 0; k < steps; ++k) oracle = stepper.step(oracle);
  }

  const Vector alpha = model.parameters();
  const double eps = std::numeric_limits<double>::epsilon();
  FdCheckResult result;
  for (const FdProbe& probe : probes) {
    if (probe.param < 0 || probe.param >= model.param_dim()) {
      throw Error(ErrorCode::out_of_range, "fd_gradient_check: parameter " + std::to_string(probe.param));
    }
    const double aj = std::abs(alpha(probe.param));
    const double hj = aj > 0.0 ? h * aj : h;
    Vector plus = alpha, minus = alpha;
    plus(probe.param) += hj;
    minus(probe.param) -= hj;
    const auto model_plus = model.with_parameters(plus);
    const auto model_minus = model.with_parameters(minus);
    const Vector v_plus = StateStepper(*model_plus, dt, integrator).advance(model_plus->initial_state(), 0.0, steps);
    const Vector v_minus = StateStepper(*model_minus, dt, integrator).advance(model_minus->initial_state(), 0.0, steps);

    const Eigen::Index count = probe.row_count < 0 ? model.state_dim() - probe.row_begin : probe.row_count;
    const Vector diff = (v_plus - v_minus).segment(probe.row_begin, count);
    if (diff.norm() < 10.0 * eps * v_plus.segment(probe.row_begin, count).norm()) {
      result.warnings.push_back("probe " + probe.label + ": difference below roundoff; increase h");
    }
    const Vector fd = diff / (2.0 * hj);
    const Vector exact = oracle.sens.col(probe.param).segment(probe.row_begin, count);
    const double scale = exact.norm();
    const double rel = scale > 0.0 ? (fd - exact).norm() / scale : (fd - exact).norm();
    result.relative.push_back(rel);
    result.max_relative = std::max(result.max_relative, rel);
  }
  return result;
}

}  // namespace fotd

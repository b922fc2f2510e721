#include "fotd/tensor.hpp"

#include "fotd/detail/field_set.hpp"
#include "fotd/sensitivity_system.hpp"

namespace fotd {

namespace {

[[noreturn]] void out_of_range(const std::string& what) { throw Error(ErrorCode::out_of_range, what); }

/// Rows of block `species` of the d x r coefficient matrix.
template <typename M>
auto species_block(M& y, const FlattenMap& map, Eigen::Index species) {
  return y.middleRows(species * map.n_r, map.n_r);
}

void require_op(const Basis& basis, const Matrix& coeffs, const SpeciesLinearOp& op) {
  if (coeffs.rows() != op.map.d()) {
    throw Error(ErrorCode::dimension_mismatch, "tensor rhs: coefficients have " + std::to_string(coeffs.rows()) +
                                                   " rows, flattened dimension is " + std::to_string(op.map.d()));
  }
  if (coeffs.cols() != basis.rank() || op.diffusion.size() != op.map.d()) {
    throw Error(ErrorCode::dimension_mismatch, "tensor rhs: inconsistent rank or diffusion length");
  }
}

}  // namespace

Eigen::Index FlattenMap::flatten(Eigen::Index i, Eigen::Index j) const {
  if (i < 1 || i > n_s || j < 1 || j > n_r) {
    out_of_range("flatten: (" + std::to_string(i) + ", " + std::to_string(j) + ") outside [1, " +
                 std::to_string(n_s) + "] x [1, " + std::to_string(n_r) + "]");
  }
  return j + (i - 1) * n_r;
}

std::pair<Eigen::Index, Eigen::Index> FlattenMap::unflatten(Eigen::Index m) const {
  if (m < 1 || m > d()) out_of_range("unflatten: " + std::to_string(m) + " outside [1, " + std::to_string(d()) + "]");
  return {(m - 1) / n_r + 1, (m - 1) % n_r + 1};
}

Eigen::Index flatten_index(Eigen::Index i, Eigen::Index j, Eigen::Index n_r) {
  if (n_r < 1 || i < 1 || j < 1 || j > n_r) {
    out_of_range("flatten_index: (" + std::to_string(i) + ", " + std::to_string(j) + ") with n_r = " +
                 std::to_string(n_r));
  }
  return j + (i - 1) * n_r;
}

std::pair<Eigen::Index, Eigen::Index> unflatten_index(Eigen::Index m, Eigen::Index n_r) {
  if (n_r < 1 || m < 1) out_of_range("unflatten_index: " + std::to_string(m) + " with n_r = " + std::to_string(n_r));
  return {(m - 1) / n_r + 1, (m - 1) % n_r + 1};
}

Matrix SpeciesLinearOp::forcing_apply(const Matrix& y, Eigen::Index n) const {
  Matrix out = Matrix::Zero(n, y.cols());
  for (const ForcingColumn& f : forcing) out += f.field * y.row(f.m);
  return out;
}

Matrix SpeciesLinearOp::forcing_project(const Matrix& u, const Vector& weights) const {
  Matrix out = Matrix::Zero(u.cols(), map.d());
  for (const ForcingColumn& f : forcing) out.col(f.m) = weighted_inner(u, f.field, weights);
  return out;
}

Matrix flatten_sensitivities(const Matrix& sens, const FlattenMap& map, Eigen::Index n) {
  if (sens.rows() != map.n_s * n || sens.cols() != map.n_r) {
    throw Error(ErrorCode::dimension_mismatch, "flatten_sensitivities: expected " +
                                                   detail::shape(map.n_s * n, map.n_r) + ", got " +
                                                   detail::shape(sens.rows(), sens.cols()));
  }
  Matrix flat(n, map.d());
  for (Eigen::Index i = 0; i < map.n_s; ++i) flat.middleCols(i * map.n_r, map.n_r) = sens.middleRows(i * n, n);
  return flat;
}

Matrix unflatten_sensitivities(const Matrix& flat, const FlattenMap& map) {
  if (flat.cols() != map.d()) throw Error(ErrorCode::dimension_mismatch, "unflatten_sensitivities: column count != d");
  const Eigen::Index n = flat.rows();
  Matrix sens(map.n_s * n, map.n_r);
  for (Eigen::Index i = 0; i < map.n_s; ++i) sens.middleRows(i * n, n) = flat.middleCols(i * map.n_r, map.n_r);
  return sens;
}

Matrix tensor_modes_rhs(const Basis& basis, const Matrix& coeffs, const SpeciesLinearOp& op, double regularization) {
  require_op(basis, coeffs, op);
  const Matrix& u = basis.modes;
  const Eigen::Index n = u.rows();

  const Matrix correlated = op.laplacian(u) * (coeffs.transpose() * op.diffusion.asDiagonal() * coeffs);
  Matrix coupled = correlated + op.forcing_apply(coeffs, n);
  for (const JacobianEntry& e : op.jacobian) {
    const Matrix g = species_block(coeffs, op.map, e.row).transpose() * species_block(coeffs, op.map, e.col);
    coupled.noalias() += e.values.asDiagonal() * u * g.transpose();
  }
  const Matrix c_inv = regularized_inverse(Matrix(coeffs.transpose() * coeffs), regularization);
  return project_complement(basis, Matrix(coupled * c_inv - op.advect(u)));
}

Matrix tensor_coeffs_rhs(const Basis& basis, const Matrix& coeffs, const SpeciesLinearOp& op) {
  require_op(basis, coeffs, op);
  const Matrix& u = basis.modes;
  const Vector& w = basis.weights;

  Matrix rate = -coeffs * weighted_inner(u, op.advect(u), w).transpose() +
                op.diffusion.asDiagonal() * coeffs * weighted_inner(u, op.laplacian(u), w).transpose() +
                op.forcing_project(u, w).transpose();
  for (const JacobianEntry& e : op.jacobian) {
    // h(k, l) = <u_k, J_e u_l>
    const Matrix h = u.transpose() * (w.cwiseProduct(e.values)).asDiagonal() * u;
    species_block(rate, op.map, e.row) += species_block(coeffs, op.map, e.col) * h.transpose();
  }
  return rate;
}

FotdState tensor_initialize(const SpeciesTransportModel& model, Eigen::Index rank, double dt,
                            const FotdOptions& options) {
  if (options.integrator != Integrator::rk4) throw ConfigError("tensor f-OTD supports rk4 only");
  const EnsembleStepper stepper(model, dt, Integrator::rk4);
  const EnsembleState first = stepper.step(zero_ensemble(model));
  const Matrix flat = flatten_sensitivities(first.sens, model.flatten_map(), model.grid_size());
  return initialize_from_ensemble(first.state, flat, first.t, model.grid_weights(), rank, options);
}

TensorFotdStepper::TensorFotdStepper(const SpeciesTransportModel& model, double dt, FotdOptions options)
    : model_(model), dt_(dt), options_(options) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (options_.integrator != Integrator::rk4) throw ConfigError("tensor f-OTD supports rk4 only");
  if (!options_.forced_modes) throw ConfigError("tensor f-OTD has no unforced-mode baseline");
}

FotdState TensorFotdStepper::step(const FotdState& state) const {
  const double t0 = state.t;
  const Vector& weights = state.basis.weights;
  auto rhs = [&](double t, const detail::FieldSet& y) {
    const StageTime st{t, t0};
    const SpeciesLinearOp op = model_.linear_op(y.state, st);
    const Basis basis{y.fields, weights};
    return detail::FieldSet{model_.nonlinear_rhs(y.state, st),
                            tensor_modes_rhs(basis, y.coeffs, op, options_.regularization),
                            tensor_coeffs_rhs(basis, y.coeffs, op)};
  };
  detail::FieldSet y1 = rk4_step(rhs, detail::FieldSet{state.model_state, state.basis.modes, state.coeffs}, t0, dt_);

  FotdState next;
  next.t = t0 + dt_;
  next.steps = state.steps + 1;
  next.model_state = std::move(y1.state);
  next.basis = Basis{std::move(y1.fields), weights};
  next.coeffs = std::move(y1.coeffs);
  if (!next.model_state.allFinite()) throw NonFiniteError("model_state", next.t);
  if (!next.basis.modes.allFinite()) throw NonFiniteError("basis", next.t);
  if (!next.coeffs.allFinite()) throw NonFiniteError("coeffs", next.t);
  if (options_.reorthonormalize_every > 0 && next.steps % options_.reorthonormalize_every == 0) {
    reorthonormalize_state(next);
  }
  return next;
}

Matrix coeff_heatmap(const RankedDecomposition& ranked, Eigen::Index mode_index, const FlattenMap& map) {
  if (mode_index < 0 || mode_index >= ranked.coeffs_ranked.cols()) {
    out_of_range("coeff_heatmap: mode " + std::to_string(mode_index) + " outside rank " +
                 std::to_string(ranked.coeffs_ranked.cols()));
  }
  if (ranked.coeffs_ranked.rows() != map.d()) {
    throw Error(ErrorCode::dimension_mismatch, "coeff_heatmap: coefficient length != n_s * n_r");
  }
  Matrix heat(map.n_s, map.n_r);
  for (Eigen::Index i = 0; i < map.n_s; ++i)
    for (Eigen::Index j = 0; j < map.n_r; ++j) heat(i, j) = ranked.coeffs_ranked(map.flatten0(i, j), mode_index);
  return heat;
}

}  // namespace fotd

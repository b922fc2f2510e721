#include "fotd/engine.hpp"

#include <random>

#include "fotd/detail/field_set.hpp"
#include "fotd/sensitivity_system.hpp"

namespace fotd {

namespace {

void require_consistent(const Basis& basis, const Matrix& coeffs) {
  if (coeffs.cols() != basis.rank()) {
    throw Error(ErrorCode::dimension_mismatch, "coefficient matrix has " + std::to_string(coeffs.cols()) +
                                                   " columns but the basis has rank " +
                                                   std::to_string(basis.rank()));
  }
}

Matrix forcing_term(const Basis& basis, const Matrix& forced, const Matrix& coeffs, double regularization) {
  const Matrix c = coeffs.transpose() * coeffs;
  return project_complement(basis, forced) * regularized_inverse(c, regularization);
}

void check_finite(const FotdState& s) {
  if (!s.model_state.allFinite()) throw NonFiniteError("model_state", s.t);
  if (!s.basis.modes.allFinite()) throw NonFiniteError("basis", s.t);
  if (!s.coeffs.allFinite()) throw NonFiniteError("coeffs", s.t);
}

}  // namespace

FotdRates fotd_rates(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t,
                     const FotdOptions& options) {
  require_consistent(basis, coeffs);
  const Matrix lu = model.linearized_apply(v, basis.modes, t);
  const Matrix reduced_op = weighted_inner(basis.modes, lu, basis.weights);

  FotdRates rates;
  rates.state = model.nonlinear_rhs(v, t);
  rates.modes = lu - basis.modes * reduced_op;
  if (options.forced_modes) {
    rates.modes += forcing_term(basis, model.forcing_apply(v, t, coeffs), coeffs, options.regularization);
  }
  rates.coeffs = coeffs * reduced_op.transpose() + model.forcing_project(v, t, basis.modes).transpose();
  return rates;
}

Matrix modes_rhs(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t,
                 double regularization) {
  require_consistent(basis, coeffs);
  const Matrix lu = model.linearized_apply(v, basis.modes, t);
  return project_complement(basis, lu) +
         forcing_term(basis, model.forcing_apply(v, t, coeffs), coeffs, regularization);
}

Matrix modes_rhs(const FotdState& state, const Model& model, double regularization) {
  return modes_rhs(model, state.model_state, state.basis, state.coeffs, StageTime::at(state.t), regularization);
}

Matrix coeffs_rhs(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t) {
  require_consistent(basis, coeffs);
  const Matrix reduced_op = weighted_inner(basis.modes, model.linearized_apply(v, basis.modes, t), basis.weights);
  return coeffs * reduced_op.transpose() + model.forcing_project(v, t, basis.modes).transpose();
}

Matrix coeffs_rhs(const FotdState& state, const Model& model) {
  return coeffs_rhs(model, state.model_state, state.basis, state.coeffs, StageTime::at(state.t));
}

FotdState initialize_from_ensemble(const Vector& model_state, const Matrix& sens, double t, const Vector& weights,
                                   Eigen::Index rank, const FotdOptions& options) {
  const Eigen::Index n = sens.rows();
  const Eigen::Index d = sens.cols();
  if (rank < 1 || rank > std::min(n, d)) {
    throw ConfigError("rank " + std::to_string(rank) + " must lie in [1, min(n, d)] = [1, " +
                      std::to_string(std::min(n, d)) + "]");
  }
  const TruncatedSvd svd = truncated_svd(sens, rank, weights);
  if (!(svd.all_singular(0) > 0.0)) {
    throw Error(ErrorCode::zero_ensemble, "cannot initialize from zero ensemble; delay initialization");
  }
  Eigen::Index numerical_rank = 0;
  while (numerical_rank < rank && svd.singular(numerical_rank) > options.rank_tolerance * svd.singular(0)) {
    ++numerical_rank;
  }

  FotdState s;
  s.t = t;
  s.model_state = model_state;
  s.coeffs = Matrix::Zero(d, rank);
  Matrix modes(n, rank);
  modes.leftCols(numerical_rank) = svd.left.leftCols(numerical_rank);
  s.coeffs.leftCols(numerical_rank) =
      svd.right.leftCols(numerical_rank) * svd.singular.head(numerical_rank).asDiagonal();

  if (numerical_rank < rank) {
    std::mt19937_64 rng(options.padding_seed);
    std::normal_distribution<double> normal;
    Matrix pad(n, rank - numerical_rank);
    for (Eigen::Index j = 0; j < pad.cols(); ++j)
      for (Eigen::Index i = 0; i < n; ++i) pad(i, j) = normal(rng);
    const Basis kept{modes.leftCols(numerical_rank), weights};
    // Two projection passes keep the padding orthogonal to working precision.
    pad = project_complement(kept, project_complement(kept, pad));
    modes.rightCols(rank - numerical_rank) = reorthonormalize(pad, weights).modes;
  }
  s.basis = Basis{std::move(modes), weights};
  return s;
}

FotdState initialize(const Model& model, Eigen::Index rank, double dt, const FotdOptions& options) {
  const EnsembleStepper stepper(model, dt, options.integrator);
  const EnsembleState first = stepper.step(zero_ensemble(model));
  return initialize_from_ensemble(first.state, first.sens, first.t, model.weights(), rank, options);
}

double resolution_ratio(const Matrix& sens, const Vector& weights, Eigen::Index rank) {
  const TruncatedSvd svd = truncated_svd(sens, rank, weights);
  if (!(svd.all_singular(0) > 0.0)) return 0.0;
  return svd.singular(rank - 1) / svd.all_singular(0);
}

FotdState initialize_resolved(const Model& model, Eigen::Index rank, double dt, const FotdOptions& options,
                              long max_steps) {
  const EnsembleStepper stepper(model, dt, options.integrator);
  EnsembleState s = zero_ensemble(model);
  for (long k = 1; k <= max_steps; ++k) {
    s = stepper.step(s);
    if (resolution_ratio(s.sens, model.weights(), rank) >= options.init_resolution) {
      return initialize_from_ensemble(s.state, s.sens, s.t, model.weights(), rank, options);
    }
  }
  throw Error(ErrorCode::rank_deficient, "sensitivities did not resolve rank " + std::to_string(rank) + " within " +
                                             std::to_string(max_steps) + " steps; lower the rank");
}

FotdStepper::FotdStepper(const Model& model, double dt, Eigen::Index rank, FotdOptions options)
    : model_(model), dt_(dt), rank_(rank), options_(options) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (options_.integrator == Integrator::etdrk4) {
    const SpectralSplit* split = model.spectral_split();
    if (split == nullptr) throw ConfigError("model '" + model.name() + "' does not support etdrk4");
    const SpectralPacking packing{split->symbol().size(), 1 + rank, model.param_dim() * rank};
    etd_ = etdrk4_precompute(packing.tile_symbol(split->symbol()), dt);
  }
}

FotdState FotdStepper::step(const FotdState& state) const {
  if (state.rank() != rank_) {
    throw Error(ErrorCode::dimension_mismatch, "stepper was built for rank " + std::to_string(rank_) +
                                                   ", state has rank " + std::to_string(state.rank()));
  }
  FotdState next = options_.integrator == Integrator::rk4 ? step_rk4(state) : step_etdrk4(state);
  finish(next);
  return next;
}

FotdState FotdStepper::step_rk4(const FotdState& state) const {
  const double t0 = state.t;
  const Vector& weights = state.basis.weights;
  auto rhs = [&](double t, const detail::FieldSet& y) {
    FotdRates r = fotd_rates(model_, y.state, Basis{y.fields, weights}, y.coeffs, StageTime{t, t0}, options_);
    return detail::FieldSet{std::move(r.state), std::move(r.modes), std::move(r.coeffs)};
  };
  const detail::FieldSet y0{state.model_state, state.basis.modes, state.coeffs};
  detail::FieldSet y1 = rk4_step(rhs, y0, t0, dt_);

  FotdState next;
  next.t = t0 + dt_;
  next.steps = state.steps + 1;
  next.model_state = std::move(y1.state);
  next.basis = Basis{std::move(y1.fields), weights};
  next.coeffs = std::move(y1.coeffs);
  return next;
}

FotdState FotdStepper::step_etdrk4(const FotdState& state) const {
  const SpectralSplit& split = *model_.spectral_split();
  const double t0 = state.t;
  const Vector& weights = state.basis.weights;
  const Eigen::Index n = model_.state_dim();
  const Eigen::Index d = state.param_dim();
  const Eigen::Index r = rank_;
  const SpectralPacking packing{split.symbol().size(), 1 + r, d * r};

  // The stiff diagonal part acts on v and on every mode; all coupling terms,
  // including U <U, L U> and the C^{-1} forcing term, are advanced explicitly.
  auto nonlinear = [&](double t, const ComplexVector& z) {
    const StageTime st{t, t0};
    const Matrix phys = split.to_physical(packing.fields_of(z));
    const Vector v = phys.col(0);
    const Basis basis{phys.rightCols(r), weights};
    const Matrix coeffs = packing.extra_of(z, d, r);

    const Matrix lu = model_.linearized_apply(v, basis.modes, st);
    const Matrix reduced_op = weighted_inner(basis.modes, lu, weights);
    Matrix out(n, 1 + r);
    out.col(0) = split.nonstiff_rhs(v, st);
    Matrix modes_rate = split.nonstiff_linearized_apply(v, basis.modes, st) - basis.modes * reduced_op;
    if (options_.forced_modes) {
      modes_rate += forcing_term(basis, model_.forcing_apply(v, st, coeffs), coeffs, options_.regularization);
    }
    out.rightCols(r) = modes_rate;
    const Matrix coeffs_rate =
        coeffs * reduced_op.transpose() + model_.forcing_project(v, st, basis.modes).transpose();
    return packing.pack(split.to_spectral(out), coeffs_rate);
  };

  Matrix phys(n, 1 + r);
  phys.col(0) = state.model_state;
  phys.rightCols(r) = state.basis.modes;
  const ComplexVector z0 = packing.pack(split.to_spectral(phys), state.coeffs);
  const ComplexVector z1 = etdrk4_step(*etd_, nonlinear, z0, t0);
  const Matrix next_phys = split.to_physical(packing.fields_of(z1));

  FotdState next;
  next.t = t0 + dt_;
  next.steps = state.steps + 1;
  next.model_state = next_phys.col(0);
  next.basis = Basis{next_phys.rightCols(r), weights};
  next.coeffs = packing.extra_of(z1, d, r);
  return next;
}

void FotdStepper::finish(FotdState& next) const {
  check_finite(next);
  if (options_.reorthonormalize_every > 0 && next.steps % options_.reorthonormalize_every == 0) {
    reorthonormalize_state(next);
  }
}

FotdState step(const FotdState& state, const Model& model, double dt, const FotdOptions& options) {
  return FotdStepper(model, dt, state.rank(), options).step(state);
}

void reorthonormalize_state(FotdState& state) {
  auto q = reorthonormalize_with_factor(state.basis.modes, state.basis.weights);
  state.coeffs = state.coeffs * q.factor.transpose();
  state.basis = std::move(q.basis);
}

RankedDecomposition rank_decomposition(const FotdState& state, double regularization) {
  const Matrix c = state.coeffs.transpose() * state.coeffs;
  const SymmetricEig eig = symmetric_eig(c);
  const Eigen::Index r = state.rank();

  RankedDecomposition out;
  out.rotation = eig.vectors;
  out.singulars = eig.values.cwiseMax(0.0).cwiseSqrt();
  out.modes_ranked = state.basis.modes * eig.vectors;
  const Matrix scaled = state.coeffs * eig.vectors;
  out.coeffs_ranked = Matrix::Zero(state.param_dim(), r);
  out.reliable.assign(static_cast<std::size_t>(r), false);
  const double leading = r > 0 ? out.singulars(0) : 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    if (out.singulars(i) > 10.0 * regularization * leading && out.singulars(i) > 0.0) {
      out.coeffs_ranked.col(i) = scaled.col(i) / out.singulars(i);
      out.reliable[static_cast<std::size_t>(i)] = true;
    }
  }
  const double energy = out.singulars.squaredNorm();
  out.energy_fractions = energy > 0.0 ? Vector(out.singulars.cwiseAbs2() / energy) : Vector::Zero(r);
  return out;
}

Matrix reconstruct(const FotdState& state, const std::optional<std::vector<Eigen::Index>>& subset) {
  if (!subset) return state.basis.modes * state.coeffs.transpose();
  Matrix rows(static_cast<Eigen::Index>(subset->size()), state.rank());
  for (std::size_t k = 0; k < subset->size(); ++k) {
    const Eigen::Index j = (*subset)[k];
    if (j < 0 || j >= state.param_dim()) {
      throw Error(ErrorCode::out_of_range, "parameter index " + std::to_string(j) + " outside [0, " +
                                               std::to_string(state.param_dim()) + ")");
    }
    rows.row(static_cast<Eigen::Index>(k)) = state.coeffs.row(j);
  }
  return state.basis.modes * rows.transpose();
}

}  // namespace fotd

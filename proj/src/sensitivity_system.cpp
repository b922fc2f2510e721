#include "fotd/sensitivity_system.hpp"

#include "fotd/detail/field_set.hpp"

namespace fotd {

EnsembleStepper::EnsembleStepper(const Model& model, double dt, Integrator integrator)
    : model_(model), dt_(dt), integrator_(integrator) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (integrator == Integrator::etdrk4) {
    const SpectralSplit* split = model.spectral_split();
    if (split == nullptr) throw ConfigError("model '" + model.name() + "' does not support etdrk4");
    const SpectralPacking packing{split->symbol().size(), 1 + model.param_dim(), 0};
    etd_ = etdrk4_precompute(packing.tile_symbol(split->symbol()), dt);
  }
}

EnsembleState EnsembleStepper::step(const EnsembleState& s) const {
  const double t0 = s.t;
  if (integrator_ == Integrator::rk4) {
    auto rhs = [&](double t, const detail::FieldSet& y) {
      const StageTime st{t, t0};
      return detail::FieldSet{model_.nonlinear_rhs(y.state, st),
                              model_.linearized_apply(y.state, y.fields, st) + model_.forcing_dense(y.state, st),
                              Matrix()};
    };
    const detail::FieldSet next = rk4_step(rhs, detail::FieldSet{s.state, s.sens, Matrix()}, t0, dt_);
    return {t0 + dt_, next.state, next.fields};
  }

  const SpectralSplit& split = *model_.spectral_split();
  const Eigen::Index n = model_.state_dim();
  const Eigen::Index d = model_.param_dim();
  const SpectralPacking packing{split.symbol().size(), 1 + d, 0};

  auto to_physical = [&](const ComplexVector& z) { return split.to_physical(packing.fields_of(z)); };
  auto nonlinear = [&](double t, const ComplexVector& z) {
    const StageTime st{t, t0};
    const Matrix phys = to_physical(z);
    const Vector v = phys.col(0);
    Matrix out(n, 1 + d);
    out.col(0) = split.nonstiff_rhs(v, st);
    out.rightCols(d) = split.nonstiff_linearized_apply(v, phys.rightCols(d), st) + model_.forcing_dense(v, st);
    return packing.pack(split.to_spectral(out), Matrix());
  };

  Matrix phys(n, 1 + d);
  phys.col(0) = s.state;
  phys.rightCols(d) = s.sens;
  const ComplexVector z = packing.pack(split.to_spectral(phys), Matrix());
  const Matrix next = to_physical(etdrk4_step(*etd_, nonlinear, z, t0));
  return {t0 + dt_, next.col(0), next.rightCols(d)};
}

StateStepper::StateStepper(const Model& model, double dt, Integrator integrator)
    : model_(model), dt_(dt), integrator_(integrator) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  if (integrator == Integrator::etdrk4) {
    const SpectralSplit* split = model.spectral_split();
    if (split == nullptr) throw ConfigError("model '" + model.name() + "' does not support etdrk4");
    etd_ = etdrk4_precompute(split->symbol(), dt);
  }
}

Vector StateStepper::step(const Vector& v, double t0) const {
  if (integrator_ == Integrator::rk4) {
    auto rhs = [&](double t, const Vector& y) { return model_.nonlinear_rhs(y, StageTime{t, t0}); };
    return rk4_step(rhs, v, t0, dt_);
  }
  const SpectralSplit& split = *model_.spectral_split();
  auto nonlinear = [&](double t, const ComplexVector& z) {
    const Vector y = split.to_physical(z).col(0);
    return ComplexVector(split.to_spectral(split.nonstiff_rhs(y, StageTime{t, t0})).col(0));
  };
  const ComplexVector z = split.to_spectral(v).col(0);
  return split.to_physical(etdrk4_step(*etd_, nonlinear, z, t0)).col(0);
}

Vector StateStepper::advance(Vector v, double t0, long steps) const {
  for (long s = 0; s < steps; ++s) v = step(v, t0 + static_cast<double>(s) * dt_);
  return v;
}

EnsembleState zero_ensemble(const Model& model, double t0) {
  return {t0, model.initial_state(), Matrix::Zero(model.state_dim(), model.param_dim())};
}

}  // namespace fotd

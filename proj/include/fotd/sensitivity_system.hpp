#pragma once

#include <optional>

#include "fotd/integrators.hpp"
#include "fotd/model.hpp"

namespace fotd {

/// Full sensitivity ensemble V' (n x d) at time t.
struct SensitivityEnsemble {
  double t = 0.0;
  Matrix sens;
};

/// Nonlinear state co-evolved with its full sensitivity ensemble.
struct EnsembleState {
  double t = 0.0;
  Vector state;
  Matrix sens;
};

/// Advances dv/dt = N(v) together with dV'/dt = L(v) V' + F' using one scheme,
/// with every stage of V' evaluated at the matching stage value of v.
class EnsembleStepper {
 public:
  EnsembleStepper(const Model& model, double dt, Integrator integrator);

  EnsembleState step(const EnsembleState& s) const;

  double dt() const { return dt_; }
  Integrator integrator() const { return integrator_; }

 private:
  const Model& model_;
  double dt_;
  Integrator integrator_;
  std::optional<EtdrkCoefficients> etd_;
};

/// Advances the nonlinear state alone with the same schemes.
class StateStepper {
 public:
  StateStepper(const Model& model, double dt, Integrator integrator);

  Vector step(const Vector& v, double t) const;
  Vector advance(Vector v, double t0, long steps) const;

 private:
  const Model& model_;
  double dt_;
  Integrator integrator_;
  std::optional<EtdrkCoefficients> etd_;
};

/// V'(0) = 0 with the model's initial state.
EnsembleState zero_ensemble(const Model& model, double t0 = 0.0);

}  // namespace fotd

#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

#include "fotd/linalg.hpp"

namespace fotd {

/// Time seen by a right-hand side evaluation. `t` is the stage time; `step_begin`
/// is the left endpoint of the step that contains the stage. Parameters that are
/// piecewise constant in time (impulse forcing) are keyed on `step_begin` so that
/// every stage of one step sees the same parameter window.
struct StageTime {
  double t = 0.0;
  double step_begin = 0.0;

  static StageTime at(double time) { return {time, time}; }
};

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Optional capability of a model whose linear operator splits into a stiff
/// part that is diagonal in some transform space (Fourier for periodic PDEs)
/// and a non-stiff remainder. Exponential integrators consume this split.
class SpectralSplit {
 public:
  virtual ~SpectralSplit() = default;

  /// Diagonal of the stiff linear operator in transform space.
  virtual ComplexVector symbol() const = 0;
  /// Columnwise forward transform of real fields.
  virtual ComplexMatrix to_spectral(const Matrix& physical) const = 0;
  /// Columnwise inverse transform; the imaginary part is discarded.
  virtual Matrix to_physical(const ComplexMatrix& spectral) const = 0;

  /// Nonlinear right-hand side minus the stiff linear part.
  virtual Vector nonstiff_rhs(const Vector& v, StageTime t) const = 0;
  /// Linearized operator minus the stiff linear part, applied columnwise.
  virtual Matrix nonstiff_linearized_apply(const Vector& v, const Matrix& w, StageTime t) const = 0;
};

/// An evolutionary system dv/dt = N(v; alpha) with sensitivity dynamics
/// dV'/dt = L(v) V' + F'(v, t).
///
/// Implementations must be safe for concurrent const evaluation.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  /// Number of state degrees of freedom n.
  virtual Eigen::Index state_dim() const = 0;
  /// Number of parameters d.
  virtual Eigen::Index param_dim() const = 0;
  virtual Vector parameters() const = 0;
  virtual Vector initial_state() const = 0;
  /// Quadrature weights of the inner product; unit weights unless overridden.
  virtual Vector weights() const { return Vector::Ones(state_dim()); }

  virtual Vector nonlinear_rhs(const Vector& v, StageTime t) const = 0;
  /// Linearized operator L(v) applied to each column of w.
  virtual Matrix linearized_apply(const Vector& v, const Matrix& w, StageTime t) const = 0;
  /// F' y for a d x k coefficient matrix y, without forming F'.
  virtual Matrix forcing_apply(const Vector& v, StageTime t, const Matrix& y) const = 0;
  /// <u_i, f'_j> for all i, j (k x d).
  virtual Matrix forcing_project(const Vector& v, StageTime t, const Matrix& u) const = 0;

  /// A copy of this model with parameters alpha (used by finite-difference checks).
  virtual std::unique_ptr<Model> with_parameters(const Vector& alpha) const = 0;

  /// Non-null when the model supports exponential integrators.
  virtual const SpectralSplit* spectral_split() const { return nullptr; }

  /// Dense F' (n x d). Convenience for oracles; O(n d) memory.
  Matrix forcing_dense(const Vector& v, StageTime t) const {
    return forcing_apply(v, t, Matrix::Identity(param_dim(), param_dim()));
  }
};

}  // namespace fotd

#pragma once

// Forced optimally time-dependent (f-OTD) reduction V' ~ U Y^T of the forced
// sensitivity equation dV'/dt = L(V') + F', in the gauge <U, dU/dt> = 0:
//
//   dU/dt = (I - U<U,.>) L(U) + (I - U<U,.>) (F' Y) C^{-1},   C = Y^T Y
//   dY/dt = Y <U, L(U)>^T + <F', U>^T
//
// The nonlinear state v is co-evolved inside the same integrator stages.

#include <cstdint>
#include <optional>
#include <vector>

#include "fotd/integrators.hpp"
#include "fotd/linalg.hpp"
#include "fotd/model.hpp"

namespace fotd {

struct FotdOptions {
  Integrator integrator = Integrator::rk4;
  /// Relative eigenvalue floor for C^{-1}.
  double regularization = kDefaultRegularization;
  /// Reorthonormalize the basis every this many steps (0 disables).
  int reorthonormalize_every = 1;
  /// Singular values below this fraction of the largest count as zero when
  /// initializing from a rank-deficient ensemble.
  double rank_tolerance = 1e-10;
  /// Seed for the deterministic orthonormal padding of rank-deficient starts.
  std::uint64_t padding_seed = 20210401;
  /// When false the modes follow the unforced linearized dynamics (OTD modes)
  /// while the coefficients still see the forcing.
  bool forced_modes = true;
  /// initialize_resolved waits until sigma_r >= init_resolution * sigma_1.
  /// Columns with smaller singular values make the C^{-1} term stiff.
  double init_resolution = 1e-5;
};

struct FotdState {
  double t = 0.0;
  Basis basis;
  /// d x r coefficient matrix Y.
  Matrix coeffs;
  /// Co-evolved nonlinear state v.
  Vector model_state;
  long steps = 0;

  Eigen::Index rank() const { return basis.rank(); }
  Eigen::Index param_dim() const { return coeffs.rows(); }
};

/// Bi-orthonormal (energy ranked) form: U Y^T = modes_ranked diag(singulars) coeffs_ranked^T.
struct RankedDecomposition {
  Matrix modes_ranked;
  Matrix coeffs_ranked;
  Vector singulars;
  Vector energy_fractions;
  /// Rotation R diagonalizing C = Y^T Y.
  Matrix rotation;
  /// False for columns whose singular value is too small to normalize.
  std::vector<bool> reliable;
};

/// Time derivatives of every component of the reduced system at one instant.
struct FotdRates {
  Vector state;
  Matrix modes;
  Matrix coeffs;
};

FotdRates fotd_rates(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t,
                     const FotdOptions& options = {});

Matrix modes_rhs(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t,
                 double regularization = kDefaultRegularization);
Matrix modes_rhs(const FotdState& state, const Model& model, double regularization = kDefaultRegularization);

Matrix coeffs_rhs(const Model& model, const Vector& v, const Basis& basis, const Matrix& coeffs, StageTime t);
Matrix coeffs_rhs(const FotdState& state, const Model& model);

/// Builds a rank-r state from a sensitivity ensemble by truncated SVD:
/// U = leading left singular vectors, Y = right singular vectors times
/// singular values. Columns beyond the numerical rank are filled with a
/// seeded orthonormal complement and zero coefficients.
FotdState initialize_from_ensemble(const Vector& model_state, const Matrix& sens, double t, const Vector& weights,
                                   Eigen::Index rank, const FotdOptions& options = {});

/// Advances the full sensitivity system one step of size dt from V'(0) = 0
/// and initializes from V'(dt).
FotdState initialize(const Model& model, Eigen::Index rank, double dt, const FotdOptions& options = {});

/// sigma_r / sigma_1 of the ensemble in the weighted norm; 0 for a zero ensemble.
double resolution_ratio(const Matrix& sens, const Vector& weights, Eigen::Index rank);

/// Advances the full sensitivity system from V'(0) = 0 until its rank-r
/// truncation is resolved (see FotdOptions::init_resolution) and initializes
/// there. Throws rank_deficient after `max_steps` unresolved steps.
FotdState initialize_resolved(const Model& model, Eigen::Index rank, double dt, const FotdOptions& options = {},
                              long max_steps = 1000);

/// Reusable stepper; ETDRK4 coefficients are computed once at construction.
class FotdStepper {
 public:
  FotdStepper(const Model& model, double dt, Eigen::Index rank, FotdOptions options = {});

  FotdState step(const FotdState& state) const;

  double dt() const { return dt_; }
  const FotdOptions& options() const { return options_; }

 private:
  FotdState step_rk4(const FotdState& state) const;
  FotdState step_etdrk4(const FotdState& state) const;
  void finish(FotdState& next) const;

  const Model& model_;
  double dt_;
  Eigen::Index rank_;
  FotdOptions options_;
  std::optional<EtdrkCoefficients> etd_;
};

FotdState step(const FotdState& state, const Model& model, double dt, const FotdOptions& options = {});

/// Restores orthonormality of the basis while leaving U Y^T unchanged.
void reorthonormalize_state(FotdState& state);

RankedDecomposition rank_decomposition(const FotdState& state, double regularization = kDefaultRegularization);

/// Columns of U Y^T for the requested (0-based) parameter indices; all
/// parameters when no subset is given.
Matrix reconstruct(const FotdState& state, const std::optional<std::vector<Eigen::Index>>& subset = std::nullopt);

}  // namespace fotd

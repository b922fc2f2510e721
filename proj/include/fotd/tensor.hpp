#pragma once

// f-OTD for multi-species transport. The n x n_s x n_r sensitivity tensor is
// flattened into an n x d quasimatrix (d = n_s n_r) with column
// m(i, j) = j + (i - 1) n_r, species-major, and compressed by one basis.
//
// For the flattened operator
//   dv'_m/dt = -(w.grad) v'_m + kappa_m lap v'_m + sum_b J_ab v'_(b,j) + s'_m,  m = (a, j)
// the mode and coefficient equations become
//   dU/dt = -(I - P) A + (I - P) [lap(U) M + sum_e diag(J_e) U G_e^T + S' Y] C^{-1}
//   dY/dt = -Y <U, A>^T + diag(kappa) Y <U, lap U>^T + reaction rows + <S', U>^T
// with A = (w.grad) U, M = Y^T diag(kappa) Y and G_e = Y_a^T Y_b for every
// nonzero Jacobian entry e = (a, b), Y_a being the species-a block of Y.

#include <functional>
#include <utility>
#include <vector>

#include "fotd/engine.hpp"

namespace fotd {

/// Bijection between (species i, parameter j) and the flattened column m.
/// The public indices are 1-based; the *0 helpers are 0-based.
struct FlattenMap {
  Eigen::Index n_s = 0;
  Eigen::Index n_r = 0;

  Eigen::Index d() const { return n_s * n_r; }
  Eigen::Index flatten(Eigen::Index i, Eigen::Index j) const;
  std::pair<Eigen::Index, Eigen::Index> unflatten(Eigen::Index m) const;

  Eigen::Index flatten0(Eigen::Index i, Eigen::Index j) const { return j + i * n_r; }
  std::pair<Eigen::Index, Eigen::Index> unflatten0(Eigen::Index m) const { return {m / n_r, m % n_r}; }
};

Eigen::Index flatten_index(Eigen::Index i, Eigen::Index j, Eigen::Index n_r);
std::pair<Eigen::Index, Eigen::Index> unflatten_index(Eigen::Index m, Eigen::Index n_r);

/// Pointwise Jacobian entry d s_row / d v_col (0-based species) over the grid.
struct JacobianEntry {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  Vector values;
};

/// Column m (0-based) of the flattened forcing S'.
struct ForcingColumn {
  Eigen::Index m = 0;
  Vector field;
};

/// The flattened sensitivity operator frozen at one state.
struct SpeciesLinearOp {
  FlattenMap map;
  /// Length-d diagonal; entry m is the diffusivity of species i(m).
  Vector diffusion;
  /// (w.grad) applied columnwise to homogeneous fields (n x k -> n x k).
  std::function<Matrix(const Matrix&)> advect;
  /// Laplacian applied columnwise to homogeneous fields.
  std::function<Matrix(const Matrix&)> laplacian;
  std::vector<JacobianEntry> jacobian;
  std::vector<ForcingColumn> forcing;

  /// S' Y (n x k) for a d x k matrix.
  Matrix forcing_apply(const Matrix& y, Eigen::Index n) const;
  /// <U, S'> (k x d).
  Matrix forcing_project(const Matrix& u, const Vector& weights) const;
};

/// A model whose state stacks n_s species fields of n grid values each
/// (species-major) and whose parameters act through the species source terms.
class SpeciesTransportModel : public Model {
 public:
  virtual Eigen::Index grid_size() const = 0;
  virtual Eigen::Index species_count() const = 0;
  virtual Vector grid_weights() const = 0;
  virtual SpeciesLinearOp linear_op(const Vector& v, StageTime t) const = 0;

  FlattenMap flatten_map() const { return {species_count(), param_dim()}; }
};

/// (n_s n) x n_r sensitivities -> n x (n_s n_r) flattened quasimatrix.
Matrix flatten_sensitivities(const Matrix& sens, const FlattenMap& map, Eigen::Index n);
Matrix unflatten_sensitivities(const Matrix& flat, const FlattenMap& map);

Matrix tensor_modes_rhs(const Basis& basis, const Matrix& coeffs, const SpeciesLinearOp& op,
                        double regularization = kDefaultRegularization);
Matrix tensor_coeffs_rhs(const Basis& basis, const Matrix& coeffs, const SpeciesLinearOp& op);

FotdState tensor_initialize(const SpeciesTransportModel& model, Eigen::Index rank, double dt,
                            const FotdOptions& options = {});

class TensorFotdStepper {
 public:
  TensorFotdStepper(const SpeciesTransportModel& model, double dt, FotdOptions options = {});
  FotdState step(const FotdState& state) const;
  double dt() const { return dt_; }

 private:
  const SpeciesTransportModel& model_;
  double dt_;
  FotdOptions options_;
};

/// Ranked coefficient column `mode_index` (0-based) reshaped to n_s x n_r.
Matrix coeff_heatmap(const RankedDecomposition& ranked, Eigen::Index mode_index, const FlattenMap& map);

}  // namespace fotd

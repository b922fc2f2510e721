#pragma once

// Shared fixtures: a dense linear model and literal dense transcriptions of
// the reduced equations, assembled from full matrices with explicit loops.

#include <memory>
#include <random>
#include <vector>

#include "fotd/engine.hpp"
#include "fotd/tensor.hpp"

namespace fotd::testing {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Vector random_weights(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = u(rng);
  return w;
}

/// dv/dt = A v + B alpha: L = A, F' = B.
class DenseLinearModel final : public Model {
 public:
  DenseLinearModel(Matrix a, Matrix b, Vector weights, Vector alpha = {})
      : a_(std::move(a)), b_(std::move(b)), w_(std::move(weights)), alpha_(std::move(alpha)) {
    if (alpha_.size() == 0) alpha_ = Vector::Ones(b_.cols());
  }

  std::string name() const override { return "dense_linear"; }
  Eigen::Index state_dim() const override { return a_.rows(); }
  Eigen::Index param_dim() const override { return b_.cols(); }
  Vector parameters() const override { return alpha_; }
  Vector initial_state() const override { return Vector::Zero(a_.rows()); }
  Vector weights() const override { return w_; }
  Vector nonlinear_rhs(const Vector& v, StageTime) const override { return a_ * v + b_ * alpha_; }
  Matrix linearized_apply(const Vector&, const Matrix& w, StageTime) const override { return a_ * w; }
  Matrix forcing_apply(const Vector&, StageTime, const Matrix& y) const override { return b_ * y; }
  Matrix forcing_project(const Vector&, StageTime, const Matrix& u) const override {
    return u.transpose() * w_.asDiagonal() * b_;
  }
  std::unique_ptr<Model> with_parameters(const Vector& alpha) const override {
    return std::make_unique<DenseLinearModel>(a_, b_, w_, alpha);
  }

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }

 private:
  Matrix a_, b_;
  Vector w_, alpha_;
};

/// Dense modes equation: (I - U U^T W) (L U + F' Y C^{-1}).
inline Matrix dense_modes_rhs(const Matrix& l, const Matrix& f, const Matrix& u, const Matrix& y, const Vector& w) {
  const Eigen::Index n = u.rows();
  const Matrix p = Matrix::Identity(n, n) - u * u.transpose() * w.asDiagonal();
  const Matrix c = y.transpose() * y;
  return p * (l * u + f * y * c.inverse());
}

/// Dense coefficient equation: Y (U^T W L U)^T + (U^T W F')^T.
inline Matrix dense_coeffs_rhs(const Matrix& l, const Matrix& f, const Matrix& u, const Matrix& y, const Vector& w) {
  const Matrix wd = w.asDiagonal();
  return y * (u.transpose() * wd * l * u).transpose() + (u.transpose() * wd * f).transpose();
}

/// Dense description of a flattened species operator on an n-point grid.
struct DenseSpeciesProblem {
  FlattenMap map;
  Matrix advect;     // n x n
  Matrix laplacian;  // n x n
  Vector kappa;      // per species
  struct Entry {
    Eigen::Index a, b;
    Vector values;
  };
  std::vector<Entry> jacobian;
  Matrix forcing;  // n x d (flattened S')

  Eigen::Index n() const { return advect.rows(); }

  SpeciesLinearOp op() const {
    SpeciesLinearOp o;
    o.map = map;
    o.diffusion.resize(map.d());
    for (Eigen::Index m = 0; m < map.d(); ++m) o.diffusion(m) = kappa(map.unflatten0(m).first);
    const Matrix adv = advect, lap = laplacian;
    o.advect = [adv](const Matrix& f) { return Matrix(adv * f); };
    o.laplacian = [lap](const Matrix& f) { return Matrix(lap * f); };
    for (const Entry& e : jacobian) o.jacobian.push_back({e.a, e.b, e.values});
    for (Eigen::Index m = 0; m < map.d(); ++m) {
      if (forcing.col(m).squaredNorm() > 0.0) o.forcing.push_back({m, forcing.col(m)});
    }
    return o;
  }

  /// Flattened right-hand side applied to a quasimatrix, column by column:
  /// dv_m = -Adv v_m + kappa_a Lap v_m + sum_b diag(J_ab) v_(b,j) + s'_m.
  Matrix apply(const Matrix& v) const {
    Matrix out(v.rows(), v.cols());
    for (Eigen::Index a = 0; a < map.n_s; ++a) {
      for (Eigen::Index j = 0; j < map.n_r; ++j) {
        const Eigen::Index m = map.flatten0(a, j);
        Vector col = -advect * v.col(m) + kappa(a) * laplacian * v.col(m) + forcing.col(m);
        for (const Entry& e : jacobian) {
          if (e.a == a) col += e.values.cwiseProduct(v.col(map.flatten0(e.b, j)));
        }
        out.col(m) = col;
      }
    }
    return out;
  }
};

inline DenseSpeciesProblem random_species_problem(Eigen::Index n, Eigen::Index n_s, Eigen::Index n_r,
                                                  std::uint64_t seed, bool with_forcing = true) {
  DenseSpeciesProblem p;
  p.map = {n_s, n_r};
  p.advect = random_matrix(n, n, seed);
  p.laplacian = random_matrix(n, n, seed + 1);
  p.kappa = random_weights(n_s, seed + 2);
  const Matrix jac = random_matrix(n, n_s * n_s, seed + 3);
  for (Eigen::Index a = 0; a < n_s; ++a)
    for (Eigen::Index b = 0; b < n_s; ++b)
      if ((a + 2 * b) % 3 != 1) p.jacobian.push_back({a, b, jac.col(a * n_s + b)});
  p.forcing = with_forcing ? random_matrix(n, n_s * n_r, seed + 4) : Matrix::Zero(n, n_s * n_r);
  return p;
}

/// Literal transcription of the tensor equations with explicit sums.
inline Matrix dense_tensor_modes_rhs(const DenseSpeciesProblem& p, const Matrix& u, const Matrix& y,
                                     const Vector& w) {
  const Eigen::Index n = u.rows(), r = u.cols();
  const Matrix c = y.transpose() * y;
  Matrix m = Matrix::Zero(r, r);
  for (Eigen::Index row = 0; row < p.map.d(); ++row) m += p.kappa(p.map.unflatten0(row).first) * y.row(row).transpose() * y.row(row);
  Matrix inner = p.laplacian * u * m + p.forcing * y;
  for (const auto& e : p.jacobian) {
    Matrix g = Matrix::Zero(r, r);
    for (Eigen::Index j = 0; j < p.map.n_r; ++j) {
      g += y.row(p.map.flatten0(e.a, j)).transpose() * y.row(p.map.flatten0(e.b, j));
    }
    inner += e.values.asDiagonal() * u * g.transpose();
  }
  const Matrix proj = Matrix::Identity(n, n) - u * u.transpose() * w.asDiagonal();
  return proj * (-(p.advect * u) + inner * c.inverse());
}

inline Matrix dense_tensor_coeffs_rhs(const DenseSpeciesProblem& p, const Matrix& u, const Matrix& y,
                                      const Vector& w) {
  const Eigen::Index r = u.cols();
  Matrix out = Matrix::Zero(p.map.d(), r);
  for (Eigen::Index m = 0; m < p.map.d(); ++m) {
    const auto [a, j] = p.map.unflatten0(m);
    for (Eigen::Index k = 0; k < r; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) {
        s -= (u.col(k).cwiseProduct(w)).dot(p.advect * u.col(i)) * y(m, i);
        s += p.kappa(a) * (u.col(k).cwiseProduct(w)).dot(p.laplacian * u.col(i)) * y(m, i);
        for (const auto& e : p.jacobian) {
          if (e.a != a) continue;
          s += (u.col(k).cwiseProduct(w)).dot(e.values.cwiseProduct(u.col(i))) * y(p.map.flatten0(e.b, j), i);
        }
      }
      s += (u.col(k).cwiseProduct(w)).dot(p.forcing.col(m));
      out(m, k) = s;
    }
  }
  return out;
}

/// Random weighted-orthonormal basis and coefficients.
inline std::pair<Basis, Matrix> random_state(Eigen::Index n, Eigen::Index d, Eigen::Index r, const Vector& w,
                                             std::uint64_t seed) {
  Basis b = reorthonormalize(random_matrix(n, r, seed), w);
  return {b, random_matrix(d, r, seed + 100)};
}

}  // namespace fotd::testing

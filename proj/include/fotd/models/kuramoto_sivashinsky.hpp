#pragma once

#include <cstdint>
#include <string>

#include "fotd/model.hpp"

namespace fotd {

/// v_t + (v^2/2)_x + v_xx + nu v_xxxx = alpha(t) sin(2 pi x / L) on a periodic
/// domain. alpha is sampled at t_i = i dt (i = 0..d-1, d = T_s / dt) and each
/// sample acts over the step that starts at t_i.
struct KsConfig {
  double nu = 1.0;
  double length = 64.0;
  Eigen::Index n = 256;
  double dt = 0.05;
  double forcing_window = 5.0;
  double horizon = 20.0;
  /// Seed of the smooth random initial condition.
  std::uint64_t seed = 7;
  /// Unforced integration applied to the random initial condition so the
  /// run starts on the attractor.
  double warmup = 100.0;

  static KsConfig preset(const std::string& name);

  Eigen::Index param_count() const;
  /// Throws ConfigError on inconsistent fields.
  void validate() const;
};

class KuramotoSivashinskyModel final : public Model, public SpectralSplit {
 public:
  explicit KuramotoSivashinskyModel(const KsConfig& config);

  std::string name() const override { return "kuramoto_sivashinsky"; }
  Eigen::Index state_dim() const override { return config_.n; }
  Eigen::Index param_dim() const override { return d_; }
  Vector parameters() const override { return Vector::Zero(d_); }
  Vector initial_state() const override { return initial_; }
  Vector weights() const override;

  Vector nonlinear_rhs(const Vector& v, StageTime t) const override;
  Matrix linearized_apply(const Vector& v, const Matrix& w, StageTime t) const override;
  Matrix forcing_apply(const Vector& v, StageTime t, const Matrix& y) const override;
  Matrix forcing_project(const Vector& v, StageTime t, const Matrix& u) const override;
  std::unique_ptr<Model> with_parameters(const Vector& alpha) const override;
  const SpectralSplit* spectral_split() const override { return this; }

  ComplexVector symbol() const override { return symbol_; }
  ComplexMatrix to_spectral(const Matrix& physical) const override;
  Matrix to_physical(const ComplexMatrix& spectral) const override;
  Vector nonstiff_rhs(const Vector& v, StageTime t) const override;
  Matrix nonstiff_linearized_apply(const Vector& v, const Matrix& w, StageTime t) const override;

  /// Index of the forcing sample active during the step starting at
  /// `step_begin`, or -1 outside the window. Throws ConfigError when
  /// `step_begin` is not on the sampling grid.
  Eigen::Index active_parameter(double step_begin) const;

  const KsConfig& config() const { return config_; }
  const Vector& grid() const { return x_; }
  const Vector& forcing_shape() const { return shape_; }
  /// 2/3-rule mask applied to quadratic products.
  const Eigen::ArrayXd& dealias_mask() const { return mask_; }
  Vector dealias(const Vector& v) const;

 private:
  KuramotoSivashinskyModel(const KsConfig& config, Vector alpha, Vector initial);
  void build_operators();
  Vector alpha_at(double step_begin) const;
  /// -(a b)_x with dealiasing, columnwise in b.
  Matrix advective(const Vector& a, const Matrix& b) const;

  KsConfig config_;
  Eigen::Index d_ = 0;
  Vector alpha_;
  Vector x_;
  Vector shape_;
  Eigen::ArrayXd wavenumber_;
  Eigen::ArrayXd mask_;
  ComplexVector symbol_;
  Vector initial_;
};

}  // namespace fotd

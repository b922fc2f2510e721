#pragma once

#include "fotd/model.hpp"

namespace fotd {

struct RosslerParams {
  double a1 = 0.1;
  double a2 = 0.1;
  double a3 = 14.0;
};

/// dv1 = -v2 - v3, dv2 = v1 + a1 v2, dv3 = a2 + v3 (v1 - a3);
/// sensitivities with respect to (a1, a2, a3).
class RosslerModel final : public Model {
 public:
  explicit RosslerModel(RosslerParams params = {}, Vector initial = Vector::Ones(3));

  std::string name() const override { return "rossler"; }
  Eigen::Index state_dim() const override { return 3; }
  Eigen::Index param_dim() const override { return 3; }
  Vector parameters() const override;
  Vector initial_state() const override { return initial_; }

  Vector nonlinear_rhs(const Vector& v, StageTime t) const override;
  Matrix linearized_apply(const Vector& v, const Matrix& w, StageTime t) const override;
  Matrix forcing_apply(const Vector& v, StageTime t, const Matrix& y) const override;
  Matrix forcing_project(const Vector& v, StageTime t, const Matrix& u) const override;
  std::unique_ptr<Model> with_parameters(const Vector& alpha) const override;

  Eigen::Matrix3d jacobian(const Vector& v) const;
  Eigen::Matrix3d forcing(const Vector& v) const;

  const RosslerParams& params() const { return params_; }

 private:
  RosslerParams params_;
  Vector initial_;
};

}  // namespace fotd

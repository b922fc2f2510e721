#include "fotd/models/rossler.hpp"

namespace fotd {

RosslerModel::RosslerModel(RosslerParams params, Vector initial) : params_(params), initial_(std::move(initial)) {
  if (initial_.size() != 3) {
    throw Error(ErrorCode::dimension_mismatch, "rossler initial state must have 3 entries");
  }
}

Vector RosslerModel::parameters() const { return Eigen::Vector3d(params_.a1, params_.a2, params_.a3); }

Vector RosslerModel::nonlinear_rhs(const Vector& v, StageTime) const {
  return Eigen::Vector3d(-v(1) - v(2), v(0) + params_.a1 * v(1), params_.a2 + v(2) * (v(0) - params_.a3));
}

Eigen::Matrix3d RosslerModel::jacobian(const Vector& v) const {
  Eigen::Matrix3d l;
  l << 0.0, -1.0, -1.0,
       1.0, params_.a1, 0.0,
       v(2), 0.0, v(0) - params_.a3;
  return l;
}

Eigen::Matrix3d RosslerModel::forcing(const Vector& v) const {
  Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
  f(1, 0) = v(1);
  f(2, 1) = 1.0;
  f(2, 2) = -v(2);
  return f;
}

Matrix RosslerModel::linearized_apply(const Vector& v, const Matrix& w, StageTime) const {
  return jacobian(v) * w;
}

Matrix RosslerModel::forcing_apply(const Vector& v, StageTime, const Matrix& y) const { return forcing(v) * y; }

Matrix RosslerModel::forcing_project(const Vector& v, StageTime, const Matrix& u) const {
  return u.transpose() * forcing(v);
}

std::unique_ptr<Model> RosslerModel::with_parameters(const Vector& alpha) const {
  if (alpha.size() != 3) throw Error(ErrorCode::dimension_mismatch, "rossler takes 3 parameters");
  return std::make_unique<RosslerModel>(RosslerParams{alpha(0), alpha(1), alpha(2)}, initial_);
}

}  // namespace fotd

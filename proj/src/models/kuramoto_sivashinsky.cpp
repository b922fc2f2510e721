#include "fotd/models/kuramoto_sivashinsky.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <random>

#include "fotd/integrators.hpp"

namespace fotd {

namespace {

Eigen::FFT<double>& fft() {
  // kissfft caches twiddles per plan; one instance per thread keeps rank
  // sweeps free of shared mutable state.
  thread_local Eigen::FFT<double> instance;
  return instance;
}

ComplexVector forward(const Vector& v) {
  ComplexVector in = v.cast<std::complex<double>>();
  ComplexVector out(v.size());
  fft().fwd(out, in);
  return out;
}

Vector inverse(const ComplexVector& z) {
  ComplexVector out(z.size());
  fft().inv(out, z);
  return out.real();
}

bool on_grid(double value, double step, double& index) {
  index = std::round(value / step);
  return std::abs(value / step - index) <= 1e-6;
}

}  // namespace

KsConfig KsConfig::preset(const std::string& name) {
  KsConfig c;
  if (name == "desk") return c;
  if (name == "paper") {
    c.length = 1000.0;
    c.n = 8192;
    c.dt = 0.01;
    c.forcing_window = 10.0;
    c.horizon = 100.0;
    return c;
  }
  throw ConfigError("unknown ks preset '" + name + "' (expected desk or paper)");
}

Eigen::Index KsConfig::param_count() const { return static_cast<Eigen::Index>(std::llround(forcing_window / dt)); }

void KsConfig::validate() const {
  if (!(nu > 0.0)) throw ConfigError("ks: nu must be positive");
  if (!(length > 0.0)) throw ConfigError("ks: domain length must be positive");
  if (n < 4 || (n & (n - 1)) != 0) throw ConfigError("ks: grid size must be a power of two");
  if (!(dt > 0.0)) throw ConfigError("ks: dt must be positive");
  double steps = 0;
  if (!(forcing_window > 0.0) || !on_grid(forcing_window, dt, steps)) {
    throw ConfigError("ks: dt does not divide the forcing window T_s");
  }
  if (forcing_window > horizon + 1e-12) throw ConfigError("ks: forcing window exceeds the horizon");
  if (warmup < 0.0) throw ConfigError("ks: warmup must be non-negative");
}

KuramotoSivashinskyModel::KuramotoSivashinskyModel(const KsConfig& config) : config_(config) {
  config_.validate();
  d_ = config_.param_count();
  alpha_ = Vector::Zero(d_);
  build_operators();

  // Smooth random start made of the lowest Fourier modes.
  const Eigen::Index n = config_.n;
  std::mt19937_64 rng(config_.seed);
  std::normal_distribution<double> normal;
  initial_ = Vector::Zero(n);
  const int modes = 8;
  for (int k = 1; k <= modes; ++k) {
    const double a = normal(rng) / modes;
    const double b = normal(rng) / modes;
    const double kx = 2.0 * std::numbers::pi * k / config_.length;
    initial_.array() += a * (kx * x_.array()).cos() + b * (kx * x_.array()).sin();
  }
  if (config_.warmup > 0.0) {
    const EtdrkCoefficients c = etdrk4_precompute(symbol_, config_.dt);
    const long steps = std::lround(config_.warmup / config_.dt);
    auto nonlinear = [&](double, const ComplexVector& z) { return forward(nonstiff_rhs(inverse(z), {})); };
    ComplexVector z = forward(initial_);
    for (long s = 0; s < steps; ++s) z = etdrk4_step(c, nonlinear, z, 0.0);
    initial_ = inverse(z);
  }
}

KuramotoSivashinskyModel::KuramotoSivashinskyModel(const KsConfig& config, Vector alpha, Vector initial)
    : config_(config), d_(config.param_count()), alpha_(std::move(alpha)), initial_(std::move(initial)) {
  build_operators();
}

void KuramotoSivashinskyModel::build_operators() {
  const Eigen::Index n = config_.n;
  const double two_pi_over_l = 2.0 * std::numbers::pi / config_.length;
  x_ = Vector::LinSpaced(n, 0.0, config_.length * (n - 1) / static_cast<double>(n));
  shape_ = (two_pi_over_l * x_.array()).sin();
  wavenumber_.resize(n);
  mask_.resize(n);
  symbol_.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index m = j <= n / 2 ? j : j - n;
    const double k = two_pi_over_l * static_cast<double>(m);
    symbol_(j) = k * k - config_.nu * k * k * k * k;
    // The Nyquist entry has no odd-derivative counterpart.
    wavenumber_(j) = (2 * j == n) ? 0.0 : k;
    mask_(j) = 3 * std::abs(m) < n ? 1.0 : 0.0;
  }
}

Vector KuramotoSivashinskyModel::weights() const {
  return Vector::Constant(config_.n, config_.length / static_cast<double>(config_.n));
}

Vector KuramotoSivashinskyModel::dealias(const Vector& v) const {
  return inverse((forward(v).array() * mask_).matrix());
}

ComplexMatrix KuramotoSivashinskyModel::to_spectral(const Matrix& physical) const {
  ComplexMatrix out(physical.rows(), physical.cols());
  for (Eigen::Index j = 0; j < physical.cols(); ++j) out.col(j) = forward(physical.col(j));
  return out;
}

Matrix KuramotoSivashinskyModel::to_physical(const ComplexMatrix& spectral) const {
  Matrix out(spectral.rows(), spectral.cols());
  for (Eigen::Index j = 0; j < spectral.cols(); ++j) out.col(j) = inverse(spectral.col(j));
  return out;
}

Matrix KuramotoSivashinskyModel::advective(const Vector& a, const Matrix& b) const {
  const std::complex<double> i(0.0, 1.0);
  const Eigen::ArrayXcd factor = -i * (wavenumber_ * mask_).cast<std::complex<double>>();
  Matrix out(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const Vector prod = a.cwiseProduct(b.col(j));
    out.col(j) = inverse((forward(prod).array() * factor).matrix());
  }
  return out;
}

Vector KuramotoSivashinskyModel::alpha_at(double step_begin) const {
  const Eigen::Index i = active_parameter(step_begin);
  return i >= 0 && alpha_(i) != 0.0 ? Vector(alpha_(i) * shape_) : Vector::Zero(config_.n);
}

Vector KuramotoSivashinskyModel::nonstiff_rhs(const Vector& v, StageTime t) const {
  return 0.5 * advective(v, v) + alpha_at(t.step_begin);
}

Matrix KuramotoSivashinskyModel::nonstiff_linearized_apply(const Vector& v, const Matrix& w, StageTime) const {
  return advective(v, w);
}

Vector KuramotoSivashinskyModel::nonlinear_rhs(const Vector& v, StageTime t) const {
  const Vector stiff = inverse((symbol_.array() * forward(v).array()).matrix());
  return stiff + nonstiff_rhs(v, t);
}

Matrix KuramotoSivashinskyModel::linearized_apply(const Vector& v, const Matrix& w, StageTime t) const {
  Matrix out = nonstiff_linearized_apply(v, w, t);
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    out.col(j) += inverse((symbol_.array() * forward(w.col(j)).array()).matrix());
  }
  return out;
}

Eigen::Index KuramotoSivashinskyModel::active_parameter(double step_begin) const {
  double index = 0;
  if (!on_grid(step_begin, config_.dt, index)) {
    throw ConfigError("ks: step start " + std::to_string(step_begin) +
                      " is not aligned with the forcing sample spacing " + std::to_string(config_.dt));
  }
  return index >= 0 && index < static_cast<double>(d_) ? static_cast<Eigen::Index>(index) : -1;
}

Matrix KuramotoSivashinskyModel::forcing_apply(const Vector&, StageTime t, const Matrix& y) const {
  if (y.rows() != d_) throw Error(ErrorCode::dimension_mismatch, "ks forcing_apply: coefficient rows != d");
  const Eigen::Index i = active_parameter(t.step_begin);
  if (i < 0) return Matrix::Zero(config_.n, y.cols());
  return shape_ * y.row(i);
}

Matrix KuramotoSivashinskyModel::forcing_project(const Vector&, StageTime t, const Matrix& u) const {
  Matrix out = Matrix::Zero(u.cols(), d_);
  const Eigen::Index i = active_parameter(t.step_begin);
  if (i >= 0) out.col(i) = weighted_inner(u, shape_, weights());
  return out;
}

std::unique_ptr<Model> KuramotoSivashinskyModel::with_parameters(const Vector& alpha) const {
  if (alpha.size() != d_) throw Error(ErrorCode::dimension_mismatch, "ks: parameter vector length != d");
  return std::unique_ptr<Model>(new KuramotoSivashinskyModel(config_, alpha, initial_));
}

}  // namespace fotd

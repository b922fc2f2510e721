#include "fotd/models/reactive_transport.hpp"

#include <cmath>
#include <limits>
#include <fstream>
#include <numbers>
#include <sstream>

namespace fotd {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> split_csv(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("velocity file: cannot parse '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

VelocityField AnalyticVelocity::sample(const Grid2D& grid) const {
  const double l1 = grid.x1_max - grid.x1_min;
  const double l2 = grid.x2_max - grid.x2_min;
  const double lambda = wavelength > 0.0 ? wavelength : 0.5 * l1;
  const double center = 0.5 * (grid.x2_min + grid.x2_max);
  VelocityField f{Vector(grid.size()), Vector(grid.size())};
  for (Eigen::Index i2 = 0; i2 < grid.n2; ++i2) {
    const double y = grid.x2(i2);
    const double eta = (y - grid.x2_min) / l2;
    const double r = 2.0 * (y - center) / l2;
    for (Eigen::Index i1 = 0; i1 < grid.n1; ++i1) {
      const double x = grid.x1(i1) - grid.x1_min;
      const Eigen::Index g = grid.index(i1, i2);
      f.w1(g) = mean * (1.0 - r * r) + 0.5 * amplitude * std::sin(2.0 * kPi * x / lambda) * std::sin(2.0 * kPi * eta);
      const double s = std::sin(kPi * eta);
      f.w2(g) = -amplitude * (l2 / lambda) * std::cos(2.0 * kPi * x / lambda) * s * s;
    }
  }
  return f;
}

VelocityField read_velocity_csv(const std::string& path, const Grid2D& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError("velocity file '" + path + "' cannot be opened");
  std::string line;
  std::getline(in, line);  // column names
  if (!std::getline(in, line)) throw ConfigError("velocity file: missing grid description");
  const std::vector<double> head = split_csv(line);
  if (head.size() != 6) throw ConfigError("velocity file: grid description needs 6 values");
  const auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  if (std::llround(head[0]) != grid.n1 || std::llround(head[1]) != grid.n2 || !close(head[2], grid.x1_min) ||
      !close(head[3], grid.x1_max) || !close(head[4], grid.x2_min) || !close(head[5], grid.x2_max)) {
    throw ConfigError("velocity file: grid does not match the configured grid");
  }
  VelocityField f{Vector(grid.size()), Vector(grid.size())};
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (!std::getline(in, line)) throw ConfigError("velocity file: expected " + std::to_string(grid.size()) + " rows");
    const std::vector<double> row = split_csv(line);
    if (row.size() != 2) throw ConfigError("velocity file: row " + std::to_string(g) + " needs 2 values");
    f.w1(g) = row[0];
    f.w2(g) = row[1];
  }
  if (!f.w1.allFinite() || !f.w2.allFinite()) throw ConfigError("velocity file: non-finite velocity");
  return f;
}

void write_velocity_csv(const std::string& path, const Grid2D& grid, const VelocityField& field) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write velocity file '" + path + "'");
  out.precision(17);
  out << "n1,n2,x1_min,x1_max,x2_min,x2_max\n";
  out << grid.n1 << ',' << grid.n2 << ',' << grid.x1_min << ',' << grid.x1_max << ',' << grid.x2_min << ','
      << grid.x2_max << '\n';
  for (Eigen::Index g = 0; g < grid.size(); ++g) out << field.w1(g) << ',' << field.w2(g) << '\n';
}

ReactiveConfig ReactiveConfig::preset(const std::string& name) {
  ReactiveConfig c;
  c.diffusion.resize(ReactionNetwork::kSpecies);
  for (int i = 0; i < ReactionNetwork::kSpecies; ++i) c.diffusion(i) = 0.08 * (1.0 + i / 22.0);
  c.alpha = ReactionNetwork::default_parameters();
  if (name == "desk") return c;
  if (name == "tiny") {
    c.grid.n1 = 16;
    c.grid.n2 = 6;
    c.diffusion *= 4.0;
    c.dt = 0.01;
    c.horizon = 0.5;
    return c;
  }
  throw ConfigError("unknown reactive preset '" + name + "' (expected desk or tiny)");
}

void ReactiveConfig::validate() const {
  if (grid.n1 < 3 || grid.n2 < 3) throw ConfigError("reactive: grid needs at least 3 cells per direction");
  if (!(grid.x1_max > grid.x1_min) || !(grid.x2_max > grid.x2_min)) throw ConfigError("reactive: empty domain");
  if (diffusion.size() != ReactionNetwork::kSpecies || !(diffusion.array() >= 0.0).all()) {
    throw ConfigError("reactive: need 23 non-negative diffusion coefficients");
  }
  if (alpha.size() != ReactionNetwork::kParameters || !(alpha.array() > 0.0).all()) {
    throw ConfigError("reactive: need 34 positive reaction parameters");
  }
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("reactive: dt and horizon must be positive");
  if (!(channel_height > 0.0) || !(inlet_steepness > 0.0)) throw ConfigError("reactive: bad inlet profile");
}

ReactiveTransportModel::ReactiveTransportModel(ReactiveConfig config)
    : config_(std::move(config)), grid_(config_.grid), network_(config_.source_scale) {
  config_.validate();
  velocity_ = config_.velocity_file.empty() ? config_.velocity.sample(grid_)
                                            : read_velocity_csv(config_.velocity_file, grid_);
  inlet_.resize(grid_.n2);
  const double h = config_.channel_height;
  const double delta = config_.inlet_steepness;
  for (Eigen::Index i2 = 0; i2 < grid_.n2; ++i2) {
    const double y = grid_.x2(i2);
    inlet_(i2) = 0.5 * (std::tanh((y + 0.5 * h) / delta) - std::tanh((y - 0.5 * h) / delta));
  }
  if (config_.scheme == AdvectionScheme::central) {
    const double pe = max_grid_peclet();
    if (pe > 2.0) {
      warnings_.push_back("grid Peclet number " + std::to_string(pe) +
                          " exceeds 2; refine the grid or use upwind advection");
    }
  }
}

double ReactiveTransportModel::max_grid_peclet() const {
  const double kappa = config_.diffusion.minCoeff();
  const double p1 = velocity_.w1.cwiseAbs().maxCoeff() * grid_.dx1();
  const double p2 = velocity_.w2.cwiseAbs().maxCoeff() * grid_.dx2();
  const double p = std::max(p1, p2);
  if (p == 0.0) return 0.0;
  return kappa > 0.0 ? p / kappa : std::numeric_limits<double>::infinity();
}

Vector ReactiveTransportModel::grid_weights() const {
  return Vector::Constant(grid_.size(), grid_.dx1() * grid_.dx2());
}

Vector ReactiveTransportModel::weights() const { return grid_weights().replicate(kSpecies, 1); }

Vector ReactiveTransportModel::initial_state() const {
  Vector v(state_dim());
  for (Eigen::Index i2 = 0; i2 < grid_.n2; ++i2)
    for (Eigen::Index i1 = 0; i1 < grid_.n1; ++i1) v(grid_.index(i1, i2)) = inlet_(i2);
  for (Eigen::Index s = 1; s < kSpecies; ++s) v.segment(s * grid_.size(), grid_.size()) = v.head(grid_.size());
  return v;
}

Matrix ReactiveTransportModel::advect(const Matrix& f, const Vector* inlet) const {
  const Eigen::Index n1 = grid_.n1, n2 = grid_.n2;
  const double h1 = grid_.dx1(), h2 = grid_.dx2();
  const bool upwind = config_.scheme == AdvectionScheme::upwind;
  Matrix out(f.rows(), f.cols());
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    const double* c = f.col(k).data();
    double* o = out.col(k).data();
    for (Eigen::Index i2 = 0; i2 < n2; ++i2) {
      for (Eigen::Index i1 = 0; i1 < n1; ++i1) {
        const Eigen::Index g = i2 * n1 + i1;
        const double center = c[g];
        const double west = i1 > 0 ? c[g - 1] : (inlet ? 2.0 * (*inlet)(i2) : 0.0) - center;
        const double east = i1 + 1 < n1 ? c[g + 1] : center;
        const double south = i2 > 0 ? c[g - n1] : center;
        const double north = i2 + 1 < n2 ? c[g + n1] : center;
        const double a = velocity_.w1(g), b = velocity_.w2(g);
        if (upwind) {
          o[g] = a * (a > 0.0 ? center - west : east - center) / h1 +
                 b * (b > 0.0 ? center - south : north - center) / h2;
        } else {
          o[g] = a * (east - west) / (2.0 * h1) + b * (north - south) / (2.0 * h2);
        }
      }
    }
  }
  return out;
}

Matrix ReactiveTransportModel::laplacian(const Matrix& f, const Vector* inlet) const {
  const Eigen::Index n1 = grid_.n1, n2 = grid_.n2;
  const double s1 = 1.0 / (grid_.dx1() * grid_.dx1()), s2 = 1.0 / (grid_.dx2() * grid_.dx2());
  Matrix out(f.rows(), f.cols());
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    const double* c = f.col(k).data();
    double* o = out.col(k).data();
    for (Eigen::Index i2 = 0; i2 < n2; ++i2) {
      for (Eigen::Index i1 = 0; i1 < n1; ++i1) {
        const Eigen::Index g = i2 * n1 + i1;
        const double center = c[g];
        const double west = i1 > 0 ? c[g - 1] : (inlet ? 2.0 * (*inlet)(i2) : 0.0) - center;
        const double east = i1 + 1 < n1 ? c[g + 1] : center;
        const double south = i2 > 0 ? c[g - n1] : center;
        const double north = i2 + 1 < n2 ? c[g + n1] : center;
        o[g] = (east - 2.0 * center + west) * s1 + (north - 2.0 * center + south) * s2;
      }
    }
  }
  return out;
}

ReactionNetwork::Concentrations ReactiveTransportModel::local(const Vector& v, Eigen::Index g) const {
  ReactionNetwork::Concentrations c;
  for (Eigen::Index s = 0; s < kSpecies; ++s) c(s) = v(s * grid_.size() + g);
  return c;
}

ReactionNetwork::Catalysts ReactiveTransportModel::catalysts(Eigen::Index g) const {
  const double p = inlet_(g / grid_.n1);
  return ReactionNetwork::Catalysts(p, p);
}

Vector ReactiveTransportModel::nonlinear_rhs(const Vector& v, StageTime) const {
  const Eigen::Index n = grid_.size();
  const Eigen::Map<const Matrix> fields(v.data(), n, kSpecies);
  const Matrix adv = advect(fields, &inlet_);
  const Matrix lap = laplacian(fields, &inlet_);
  Matrix out = -adv + lap * config_.diffusion.asDiagonal();
  const ReactionNetwork::Params alpha = config_.alpha;
  for (Eigen::Index g = 0; g < n; ++g) out.row(g) += network_.source(local(v, g), catalysts(g), alpha).transpose();
  return Eigen::Map<const Vector>(out.data(), out.size());
}

Matrix ReactiveTransportModel::linearized_apply(const Vector& v, const Matrix& w, StageTime) const {
  const Eigen::Index n = grid_.size();
  if (w.rows() != state_dim()) throw Error(ErrorCode::dimension_mismatch, "reactive linearized_apply: bad rows");
  const ReactionNetwork::Params alpha = config_.alpha;
  std::vector<ReactionNetwork::Jacobian> jac(static_cast<std::size_t>(n));
  for (Eigen::Index g = 0; g < n; ++g) jac[static_cast<std::size_t>(g)] = network_.jacobian(local(v, g), catalysts(g), alpha);

  Matrix out(w.rows(), w.cols());
  for (Eigen::Index s = 0; s < kSpecies; ++s) {
    const Matrix block = w.middleRows(s * n, n);
    out.middleRows(s * n, n) = config_.diffusion(s) * laplacian(block) - advect(block);
  }
  for (const auto& [a, b] : network_.jacobian_pattern()) {
    Vector values(n);
    for (Eigen::Index g = 0; g < n; ++g) values(g) = jac[static_cast<std::size_t>(g)](a, b);
    out.middleRows(a * n, n) += values.asDiagonal() * w.middleRows(b * n, n);
  }
  return out;
}

Matrix ReactiveTransportModel::forcing_apply(const Vector& v, StageTime, const Matrix& y) const {
  const Eigen::Index n = grid_.size();
  if (y.rows() != param_dim()) throw Error(ErrorCode::dimension_mismatch, "reactive forcing_apply: bad rows");
  const ReactionNetwork::Params alpha = config_.alpha;
  Matrix out(state_dim(), y.cols());
  for (Eigen::Index g = 0; g < n; ++g) {
    const ReactionNetwork::ParamJacobian p = network_.param_jacobian(local(v, g), catalysts(g), alpha);
    const Matrix py = p * y;
    for (Eigen::Index s = 0; s < kSpecies; ++s) out.row(s * n + g) = py.row(s);
  }
  return out;
}

Matrix ReactiveTransportModel::forcing_project(const Vector& v, StageTime t, const Matrix& u) const {
  const Matrix f = forcing_apply(v, t, Matrix::Identity(param_dim(), param_dim()));
  return weighted_inner(u, f, weights());
}

std::unique_ptr<Model> ReactiveTransportModel::with_parameters(const Vector& alpha) const {
  ReactiveConfig c = config_;
  c.alpha = alpha;
  return std::make_unique<ReactiveTransportModel>(std::move(c));
}

SpeciesLinearOp ReactiveTransportModel::linear_op(const Vector& v, StageTime) const {
  const Eigen::Index n = grid_.size();
  SpeciesLinearOp op;
  op.map = flatten_map();
  op.diffusion.resize(op.map.d());
  for (Eigen::Index s = 0; s < kSpecies; ++s) op.diffusion.segment(s * op.map.n_r, op.map.n_r).setConstant(config_.diffusion(s));
  op.advect = [this](const Matrix& f) { return advect(f); };
  op.laplacian = [this](const Matrix& f) { return laplacian(f); };

  const ReactionNetwork::Params alpha = config_.alpha;
  const auto& jp = network_.jacobian_pattern();
  const auto& pp = network_.param_pattern();
  op.jacobian.resize(jp.size());
  op.forcing.resize(pp.size());
  for (std::size_t e = 0; e < jp.size(); ++e) op.jacobian[e] = {jp[e].first, jp[e].second, Vector(n)};
  for (std::size_t e = 0; e < pp.size(); ++e) op.forcing[e] = {op.map.flatten0(pp[e].first, pp[e].second), Vector(n)};
  for (Eigen::Index g = 0; g < n; ++g) {
    const auto c = local(v, g);
    const auto cat = catalysts(g);
    const ReactionNetwork::Jacobian j = network_.jacobian(c, cat, alpha);
    const ReactionNetwork::ParamJacobian p = network_.param_jacobian(c, cat, alpha);
    for (std::size_t e = 0; e < jp.size(); ++e) op.jacobian[e].values(g) = j(jp[e].first, jp[e].second);
    for (std::size_t e = 0; e < pp.size(); ++e) op.forcing[e].field(g) = p(pp[e].first, pp[e].second);
  }
  return op;
}

}  // namespace fotd

#pragma once

#include <string>
#include <vector>

#include "fotd/models/reaction_network.hpp"
#include "fotd/tensor.hpp"

namespace fotd {

enum class AdvectionScheme { central, upwind };

/// Cell-centered uniform grid on [x1_min, x1_max] x [x2_min, x2_max]; cell
/// (i1, i2) has flat index g = i2 * n1 + i1.
struct Grid2D {
  Eigen::Index n1 = 64;
  Eigen::Index n2 = 24;
  double x1_min = 0.0;
  double x1_max = 8.0;
  double x2_min = -1.5;
  double x2_max = 1.5;

  Eigen::Index size() const { return n1 * n2; }
  double dx1() const { return (x1_max - x1_min) / static_cast<double>(n1); }
  double dx2() const { return (x2_max - x2_min) / static_cast<double>(n2); }
  double x1(Eigen::Index i1) const { return x1_min + (static_cast<double>(i1) + 0.5) * dx1(); }
  double x2(Eigen::Index i2) const { return x2_min + (static_cast<double>(i2) + 0.5) * dx2(); }
  Eigen::Index index(Eigen::Index i1, Eigen::Index i2) const { return i2 * n1 + i1; }
};

/// Steady velocity sampled at cell centers.
struct VelocityField {
  Vector w1;
  Vector w2;
};

/// Parabolic channel profile plus the divergence-free cellular perturbation
/// derived from the stream function
///   psi = (amplitude L2 / 4 pi) sin(2 pi x1 / lambda) (1 - cos(2 pi (x2 - x2_min) / L2)),
/// with w1 = d psi / d x2 and w2 = -d psi / d x1. Both components vanish on the walls.
struct AnalyticVelocity {
  double mean = 1.0;
  double amplitude = 0.5;
  /// Perturbation wavelength in x1; non-positive means half the domain length.
  double wavelength = 0.0;

  VelocityField sample(const Grid2D& grid) const;
};

/// CSV layout: header line "n1,n2,x1_min,x1_max,x2_min,x2_max", a line with
/// those six values, then n1 * n2 lines "w1,w2" ordered with i1 fastest.
VelocityField read_velocity_csv(const std::string& path, const Grid2D& grid);
void write_velocity_csv(const std::string& path, const Grid2D& grid, const VelocityField& field);

struct ReactiveConfig {
  Grid2D grid;
  double channel_height = 1.0;
  double inlet_steepness = 0.1;
  AnalyticVelocity velocity;
  /// Optional externally computed velocity; overrides `velocity` when set.
  std::string velocity_file;
  Vector diffusion;
  Vector alpha;
  double source_scale = 100.0;
  double dt = 0.01;
  double horizon = 4.0;
  AdvectionScheme scheme = AdvectionScheme::central;

  static ReactiveConfig preset(const std::string& name);
  void validate() const;
};

class ReactiveTransportModel final : public SpeciesTransportModel {
 public:
  explicit ReactiveTransportModel(ReactiveConfig config);

  std::string name() const override { return "reactive_transport"; }
  Eigen::Index state_dim() const override { return kSpecies * grid_.size(); }
  Eigen::Index param_dim() const override { return ReactionNetwork::kParameters; }
  Vector parameters() const override { return config_.alpha; }
  Vector initial_state() const override;
  Vector weights() const override;

  Vector nonlinear_rhs(const Vector& v, StageTime t) const override;
  Matrix linearized_apply(const Vector& v, const Matrix& w, StageTime t) const override;
  Matrix forcing_apply(const Vector& v, StageTime t, const Matrix& y) const override;
  Matrix forcing_project(const Vector& v, StageTime t, const Matrix& u) const override;
  std::unique_ptr<Model> with_parameters(const Vector& alpha) const override;

  Eigen::Index grid_size() const override { return grid_.size(); }
  Eigen::Index species_count() const override { return kSpecies; }
  Vector grid_weights() const override;
  SpeciesLinearOp linear_op(const Vector& v, StageTime t) const override;

  /// (w.grad) f for each column; `inlet` holds Dirichlet data per x2 row
  /// (nullptr for homogeneous data).
  Matrix advect(const Matrix& f, const Vector* inlet = nullptr) const;
  Matrix laplacian(const Matrix& f, const Vector* inlet = nullptr) const;

  const ReactiveConfig& config() const { return config_; }
  const Grid2D& grid() const { return grid_; }
  const VelocityField& velocity() const { return velocity_; }
  const Vector& inlet_profile() const { return inlet_; }
  const ReactionNetwork& network() const { return network_; }
  double max_grid_peclet() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  static constexpr Eigen::Index kSpecies = ReactionNetwork::kSpecies;

  ReactionNetwork::Concentrations local(const Vector& v, Eigen::Index g) const;
  ReactionNetwork::Catalysts catalysts(Eigen::Index g) const;

  ReactiveConfig config_;
  Grid2D grid_;
  VelocityField velocity_;
  /// Inlet profile per x2 row.
  Vector inlet_;
  ReactionNetwork network_;
  std::vector<std::string> warnings_;
};

}  // namespace fotd

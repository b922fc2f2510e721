#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fotd {

/// The 22-reaction biochemical network with 23 transported species and 34
/// rate parameters. Species 24 and 25 appear only as catalysts and are
/// supplied by the caller. Every source term is multiplied by `scale`.
class ReactionNetwork {
 public:
  static constexpr int kSpecies = 23;
  static constexpr int kParameters = 34;
  static constexpr int kCatalysts = 2;

  using Concentrations = Eigen::Matrix<double, kSpecies, 1>;
  using Catalysts = Eigen::Matrix<double, kCatalysts, 1>;
  using Params = Eigen::Matrix<double, kParameters, 1>;
  using Jacobian = Eigen::Matrix<double, kSpecies, kSpecies>;
  using ParamJacobian = Eigen::Matrix<double, kSpecies, kParameters>;

  enum class Kind { michaelis_menten, bimolecular, linear };

  /// One rate expression. Species indices are 0-based; 23 and 24 refer to the
  /// two catalysts. `rate` and `saturation` are 0-based parameter indices.
  struct Term {
    Kind kind;
    int rate;
    int saturation;
    int first;
    int second;
    std::vector<std::pair<int, double>> stoichiometry;
  };

  explicit ReactionNetwork(double scale = 100.0);

  static Params default_parameters();
  static const std::vector<Term>& terms();

  double scale() const { return scale_; }

  Concentrations source(const Concentrations& c, const Catalysts& cat, const Params& alpha) const;
  /// d source / d concentration.
  Jacobian jacobian(const Concentrations& c, const Catalysts& cat, const Params& alpha) const;
  /// d source / d alpha.
  ParamJacobian param_jacobian(const Concentrations& c, const Catalysts& cat, const Params& alpha) const;

  /// Structurally nonzero (species, species) entries of the Jacobian.
  const std::vector<std::pair<int, int>>& jacobian_pattern() const { return jacobian_pattern_; }
  /// Structurally nonzero (species, parameter) entries of the parameter Jacobian.
  const std::vector<std::pair<int, int>>& param_pattern() const { return param_pattern_; }

 private:
  double scale_;
  std::vector<std::pair<int, int>> jacobian_pattern_;
  std::vector<std::pair<int, int>> param_pattern_;
};

}  // namespace fotd

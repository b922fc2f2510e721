#include "fotd/integrators.hpp"

#include <cmath>
#include <numbers>

namespace fotd {

std::string to_string(Integrator integrator) {
  switch (integrator) {
    case Integrator::rk4:
      return "rk4";
    case Integrator::etdrk4:
      return "etdrk4";
  }
  return "unknown";
}

Integrator parse_integrator(const std::string& name) {
  if (name == "rk4") return Integrator::rk4;
  if (name == "etdrk4") return Integrator::etdrk4;
  throw ConfigError("unknown integrator '" + name + "' (expected rk4 or etdrk4)");
}

EtdrkCoefficients etdrk4_precompute(const ComplexVector& symbol, double dt, int contour_points) {
  if (!(dt > 0.0)) throw ConfigError("etdrk4_precompute: dt must be positive");
  if (contour_points < 1) throw ConfigError("etdrk4_precompute: need at least one contour point");
  using C = std::complex<double>;
  const Eigen::Index n = symbol.size();

  EtdrkCoefficients c;
  c.dt = dt;
  c.e.resize(n);
  c.e2.resize(n);
  c.q.resize(n);
  c.f1.resize(n);
  c.f2.resize(n);
  c.f3.resize(n);

  std::vector<C> roots(static_cast<std::size_t>(contour_points));
  for (int j = 0; j < contour_points; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / contour_points;
    roots[static_cast<std::size_t>(j)] = std::polar(1.0, 2.0 * theta);
  }

  for (Eigen::Index k = 0; k < n; ++k) {
    const C center = dt * symbol(k);
    c.e(k) = std::exp(center);
    c.e2(k) = std::exp(0.5 * center);
    C q{0.0}, f1{0.0}, f2{0.0}, f3{0.0};
    for (const C& root : roots) {
      const C r = center + root;
      const C er = std::exp(r);
      const C r3 = r * r * r;
      q += (std::exp(0.5 * r) - 1.0) / r;
      f1 += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
      f2 += (2.0 + r + er * (r - 2.0)) / r3;
      f3 += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    const double scale = dt / contour_points;
    c.q(k) = scale * q;
    c.f1(k) = scale * f1;
    c.f2(k) = scale * f2;
    c.f3(k) = scale * f3;
  }
  return c;
}

}  // namespace fotd

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

#include "fotd/errors.hpp"
#include "fotd/model.hpp"

namespace fotd {

enum class Integrator { rk4, etdrk4 };

std::string to_string(Integrator integrator);
Integrator parse_integrator(const std::string& name);

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

/// One classical fourth-order Runge-Kutta step. `rhs(t, y)` must return a
/// value convertible to State; State must support `y + a * k`.
template <typename State, typename Rhs>
State rk4_step(Rhs&& rhs, const State& y, double t, double dt) {
  const double half = 0.5 * dt;
  auto check = [t](const State& k, const char* stage) {
    if (!all_finite(k)) throw NonFiniteError(std::string("rk4 stage ") + stage, t);
  };
  const State k1 = rhs(t, y);
  check(k1, "1");
  const State k2 = rhs(t + half, State(y + half * k1));
  check(k2, "2");
  const State k3 = rhs(t + half, State(y + half * k2));
  check(k3, "3");
  const State k4 = rhs(t + dt, State(y + dt * k3));
  check(k4, "4");
  return State(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Per-entry ETDRK4 coefficients (Cox-Matthews scheme) for a fixed step and
/// diagonal linear symbol. `f1`, `f2`, `f3` weight N(u), N(a)+N(b) and N(c).
struct EtdrkCoefficients {
  double dt = 0.0;
  Eigen::ArrayXcd e;
  Eigen::ArrayXcd e2;
  Eigen::ArrayXcd q;
  Eigen::ArrayXcd f1;
  Eigen::ArrayXcd f2;
  Eigen::ArrayXcd f3;

  Eigen::Index size() const { return e.size(); }
};

/// Evaluates the phi-function combinations by averaging over `contour_points`
/// points on a circle of radius one around dt * lambda, which removes the
/// cancellation near lambda = 0.
EtdrkCoefficients etdrk4_precompute(const ComplexVector& symbol, double dt, int contour_points = 32);

/// One ETDRK4 step of du/dt = symbol .* u + nonlinear(t, u).
template <typename Nonlinear>
ComplexVector etdrk4_step(const EtdrkCoefficients& c, Nonlinear&& nonlinear, const ComplexVector& u, double t) {
  if (u.size() != c.size()) {
    throw Error(ErrorCode::dimension_mismatch, "etdrk4_step: state has " + std::to_string(u.size()) +
                                                   " entries, coefficients have " + std::to_string(c.size()));
  }
  const double dt = c.dt;
  auto check = [t](const ComplexVector& k, const char* stage) {
    if (!k.allFinite()) throw NonFiniteError(std::string("etdrk4 stage ") + stage, t);
  };
  const ComplexVector nu = nonlinear(t, u);
  check(nu, "1");
  const ComplexVector a = (c.e2 * u.array() + c.q * nu.array()).matrix();
  const ComplexVector na = nonlinear(t + 0.5 * dt, a);
  check(na, "2");
  const ComplexVector b = (c.e2 * u.array() + c.q * na.array()).matrix();
  const ComplexVector nb = nonlinear(t + 0.5 * dt, b);
  check(nb, "3");
  const ComplexVector cc = (c.e2 * a.array() + c.q * (2.0 * nb.array() - nu.array())).matrix();
  const ComplexVector nc = nonlinear(t + dt, cc);
  check(nc, "4");
  return (c.e * u.array() + c.f1 * nu.array() + 2.0 * c.f2 * (na.array() + nb.array()) + c.f3 * nc.array())
      .matrix();
}

/// Packs `fields` spectral columns of length m followed by `extra` real entries
/// (evolved with a zero symbol) into one complex vector for ETDRK4.
struct SpectralPacking {
  Eigen::Index m = 0;
  Eigen::Index fields = 0;
  Eigen::Index extra = 0;

  Eigen::Index size() const { return m * fields + extra; }

  ComplexVector tile_symbol(const ComplexVector& base) const {
    ComplexVector out = ComplexVector::Zero(size());
    for (Eigen::Index f = 0; f < fields; ++f) out.segment(f * m, m) = base;
    return out;
  }

  ComplexVector pack(const ComplexMatrix& spectral, const Matrix& real_block) const {
    ComplexVector out(size());
    for (Eigen::Index f = 0; f < fields; ++f) out.segment(f * m, m) = spectral.col(f);
    out.tail(extra) = Eigen::Map<const Vector>(real_block.data(), extra).cast<std::complex<double>>();
    return out;
  }

  ComplexMatrix fields_of(const ComplexVector& z) const {
    ComplexMatrix out(m, fields);
    for (Eigen::Index f = 0; f < fields; ++f) out.col(f) = z.segment(f * m, m);
    return out;
  }

  Matrix extra_of(const ComplexVector& z, Eigen::Index rows, Eigen::Index cols) const {
    Matrix out(rows, cols);
    Eigen::Map<Vector>(out.data(), extra) = z.tail(extra).real();
    return out;
  }
};

}  // namespace fotd

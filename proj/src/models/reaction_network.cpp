#include "fotd/models/reaction_network.hpp"

#include <algorithm>
#include <set>

namespace fotd {

namespace {

using Kind = ReactionNetwork::Kind;
using Term = ReactionNetwork::Term;

// Arguments are 1-based as in the usual tabulation of this network.
Term mm(int rate, int saturation, int c, int s, std::vector<std::pair<int, double>> st) {
  for (auto& [i, _] : st) --i;
  return {Kind::michaelis_menten, rate - 1, saturation - 1, c - 1, s - 1, std::move(st)};
}
Term bi(int rate, int p, int q, std::vector<std::pair<int, double>> st) {
  for (auto& [i, _] : st) --i;
  return {Kind::bimolecular, rate - 1, -1, p - 1, q - 1, std::move(st)};
}
Term lin(int rate, int p, std::vector<std::pair<int, double>> st) {
  for (auto& [i, _] : st) --i;
  return {Kind::linear, rate - 1, -1, p - 1, -1, std::move(st)};
}

struct Evaluated {
  double value;
  double d_first;
  double d_second;
  double d_rate;
  double d_saturation;
};

Evaluated evaluate(const Term& term, double x, double y, const ReactionNetwork::Params& a) {
  const double k = a(term.rate);
  switch (term.kind) {
    case Kind::michaelis_menten: {
      const double b = a(term.saturation);
      const double den = b + y;
      return {k * x * y / den, k * y / den, k * x * b / (den * den), x * y / den, -k * x * y / (den * den)};
    }
    case Kind::bimolecular:
      return {k * x * y, k * y, k * x, x * y, 0.0};
    case Kind::linear:
      return {k * x, k, 0.0, x, 0.0};
  }
  return {};
}

double concentration(int species, const ReactionNetwork::Concentrations& c, const ReactionNetwork::Catalysts& cat) {
  if (species < 0) return 0.0;
  return species < ReactionNetwork::kSpecies ? c(species) : cat(species - ReactionNetwork::kSpecies);
}

}  // namespace

const std::vector<Term>& ReactionNetwork::terms() {
  static const std::vector<Term> table = {
      mm(1, 2, 13, 2, {{1, 1.0}, {2, -1.0}}),
      bi(3, 1, 15, {{1, -1.0}, {15, -1.0}}),
      mm(4, 5, 9, 4, {{3, 1.0}, {4, 1.0}}),
      lin(6, 3, {{3, -1.0}}),
      mm(7, 8, 17, 3, {{3, -1.0}}),
      mm(9, 10, 9, 6, {{5, 1.0}, {6, -1.0}}),
      lin(11, 5, {{5, -1.0}}),
      mm(12, 13, 17, 5, {{5, -1.0}}),
      mm(14, 15, 24, 8, {{7, 1.0}, {8, -1.0}}),
      bi(16, 7, 15, {{7, -1.0}, {15, -1.0}}),
      bi(17, 16, 7, {{7, -1.0}, {16, -1.0}}),
      mm(18, 19, 25, 10, {{9, 1.0}, {10, -1.0}}),
      bi(20, 9, 15, {{9, -1.0}, {15, -1.0}}),
      mm(21, 22, 9, 12, {{11, 1.0}, {12, -1.0}}),
      mm(23, 24, 21, 11, {{11, -1.0}}),
      mm(25, 26, 9, 14, {{13, 1.0}, {14, -1.0}}),
      bi(27, 13, 15, {{13, -1.0}, {15, -1.0}}),
      bi(28, 13, 19, {{13, -1.0}, {19, -1.0}}),
      mm(29, 30, 9, 18, {{17, 1.0}, {18, -1.0}}),
      bi(31, 17, 19, {{17, -1.0}, {19, -1.0}}),
      mm(32, 33, 20, 22, {{21, 1.0}, {22, -1.0}}),
      bi(34, 21, 23, {{21, -1.0}, {23, -1.0}}),
  };
  return table;
}

ReactionNetwork::Params ReactionNetwork::default_parameters() {
  Params a;
  a << 2.54e-2, 160, 3.74e-5, 0.449, 1.12e5, 5.13e-4, 2.36e-2, 14.6, 6.24e-2, 140.5, 3.93e-4, 2.36e-2, 14.6, 5.523,
      160, 8.01e-4, 1.11e-3, 3.105, 1060, 1.65e-3, 8.177, 3160, 3.456, 2.50e5, 1.80e-5, 50, 3.70e-6, 3.00e-8,
      9.01e-2, 3190, 1.52e-9, 2.77e-2, 18, 2.22e-4;
  return a;
}

ReactionNetwork::ReactionNetwork(double scale) : scale_(scale) {
  std::set<std::pair<int, int>> jac, par;
  for (const Term& t : terms()) {
    for (const auto& [species, _] : t.stoichiometry) {
      for (int arg : {t.first, t.second}) {
        if (arg >= 0 && arg < kSpecies) jac.insert({species, arg});
      }
      par.insert({species, t.rate});
      if (t.saturation >= 0) par.insert({species, t.saturation});
    }
  }
  jacobian_pattern_.assign(jac.begin(), jac.end());
  param_pattern_.assign(par.begin(), par.end());
}

ReactionNetwork::Concentrations ReactionNetwork::source(const Concentrations& c, const Catalysts& cat,
                                                        const Params& alpha) const {
  Concentrations s = Concentrations::Zero();
  for (const Term& t : terms()) {
    const double x = concentration(t.first, c, cat);
    const double y = t.second >= 0 ? concentration(t.second, c, cat) : 0.0;
    const double value = evaluate(t, x, y, alpha).value;
    for (const auto& [species, coeff] : t.stoichiometry) s(species) += coeff * value;
  }
  return scale_ * s;
}

ReactionNetwork::Jacobian ReactionNetwork::jacobian(const Concentrations& c, const Catalysts& cat,
                                                    const Params& alpha) const {
  Jacobian j = Jacobian::Zero();
  for (const Term& t : terms()) {
    const double x = concentration(t.first, c, cat);
    const double y = t.second >= 0 ? concentration(t.second, c, cat) : 0.0;
    const Evaluated e = evaluate(t, x, y, alpha);
    for (const auto& [species, coeff] : t.stoichiometry) {
      if (t.first < kSpecies) j(species, t.first) += coeff * e.d_first;
      if (t.second >= 0 && t.second < kSpecies) j(species, t.second) += coeff * e.d_second;
    }
  }
  return scale_ * j;
}

ReactionNetwork::ParamJacobian ReactionNetwork::param_jacobian(const Concentrations& c, const Catalysts& cat,
                                                               const Params& alpha) const {
  ParamJacobian p = ParamJacobian::Zero();
  for (const Term& t : terms()) {
    const double x = concentration(t.first, c, cat);
    const double y = t.second >= 0 ? concentration(t.second, c, cat) : 0.0;
    const Evaluated e = evaluate(t, x, y, alpha);
    for (const auto& [species, coeff] : t.stoichiometry) {
      p(species, t.rate) += coeff * e.d_rate;
      if (t.saturation >= 0) p(species, t.saturation) += coeff * e.d_saturation;
    }
  }
  return scale_ * p;
}

}  // namespace fotd

#pragma once

#include "fotd/linalg.hpp"

namespace fotd::detail {

/// Vector-space bundle of the quantities advanced together by one explicit
/// step: the nonlinear state, an n x k block of fields and a d x k block of
/// coefficients (either block may be empty).
struct FieldSet {
  Vector state;
  Matrix fields;
  Matrix coeffs;
};

inline FieldSet operator+(const FieldSet& a, const FieldSet& b) {
  return {a.state + b.state, a.fields + b.fields, a.coeffs + b.coeffs};
}

inline FieldSet operator*(double s, const FieldSet& a) { return {s * a.state, s * a.fields, s * a.coeffs}; }

inline bool all_finite(const FieldSet& a) {
  return a.state.allFinite() && a.fields.allFinite() && a.coeffs.allFinite();
}

}  // namespace fotd::detail

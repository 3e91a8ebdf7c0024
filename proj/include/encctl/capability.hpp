// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace encctl {

/// Multiplicative depth of a degree-d monomial evaluated as a balanced
/// product tree: ceil(log2 d).
constexpr int multiplicative_depth(int degree) {
  int depth = 0;
  while ((1 << depth) < degree) ++depth;
  return depth;
}

/// What a homomorphic evaluation needs (or a backend offers).
struct Capability {
  enum class Kind { additive, leveled };

  Kind kind = Kind::additive;
  int degree = 1;  // max total degree of a monomial

  static constexpr Capability additive() { return {Kind::additive, 1}; }
  static constexpr Capability leveled(int degree) { return {Kind::leveled, degree}; }

  /// Capability needed to evaluate a polynomial of the given total degree.
  static constexpr Capability for_degree(int degree) {
    return degree <= 1 ? additive() : leveled(degree);
  }

  constexpr bool covers(const Capability& required) const {
    if (required.kind == Kind::additive) return true;
    return kind == Kind::leveled && degree >= required.degree;
  }

  std::string to_string() const {
    return kind == Kind::additive ? "Additive" : "Leveled(" + std::to_string(degree) + ")";
  }

  friend constexpr bool operator==(const Capability&, const Capability&) = default;
};

}  // namespace encctl

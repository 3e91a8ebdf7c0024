// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Polynomial controllers in triangular observable canonical form
//   z_i(t+1) = g_i(z_1..z_{i-1}, z_n', y)   (i = 1..n')
//   u(t)     = z_n'(t)
// and their conversion to an input-output recursion of memory n'.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "encctl/error.hpp"
#include "encctl/polynomial.hpp"
#include "encctl/realization/io.hpp"
#include "encctl/realization/linear.hpp"

namespace encctl::realization {

/// g[i-1] is g_i over variables z[j] and y[0][k]. The unobservable part of
/// the original system never influences u and is not stored.
struct CanonicalSystem {
  int n = 1;
  int p = 1;
  std::vector<Polynomial<double>> g;
  Eigen::VectorXd z0;  // empty means zero

  Eigen::VectorXd initial_state() const { return z0.size() == 0 ? Eigen::VectorXd::Zero(n) : z0; }

  /// g_i may read z_j only for j < i or j = n', and y only at lag 0.
  void validate() const {
    if (n < 1) fail(ErrorCode::InvalidArgument, "canonical dimension must be >= 1");
    if (p < 1) fail(ErrorCode::InvalidArgument, "input dimension must be >= 1");
    if (g.size() != static_cast<std::size_t>(n))
      fail(ErrorCode::InvalidArgument, "expected " + std::to_string(n) + " state maps, got " + std::to_string(g.size()));
    if (z0.size() != 0 && z0.size() != n) fail(ErrorCode::InvalidArgument, "z0 must have length n'");
    for (int i = 1; i <= n; ++i) {
      for (const auto& t : g[static_cast<std::size_t>(i - 1)].terms) {
        if (!std::isfinite(t.coeff)) fail(ErrorCode::InvalidArgument, "non-finite coefficient in g_" + std::to_string(i));
        for (const auto& [v, k] : t.powers) {
          const std::string where = " in g_" + std::to_string(i);
          switch (v.kind) {
            case VarKind::z:
              if (v.index > n) fail(ErrorCode::PatternViolation, to_string(v) + " does not exist" + where);
              if (v.index >= i && v.index != n)
                fail(ErrorCode::PatternViolation,
                     to_string(v) + where + " breaks the triangular pattern (allowed: z[1..i-1] and z[n'])");
              break;
            case VarKind::y:
              if (v.index != 0) fail(ErrorCode::PatternViolation, to_string(v) + where + ": inputs enter at lag 0 only");
              if (v.component > p) fail(ErrorCode::PatternViolation, to_string(v) + where + " exceeds the input dimension");
              break;
            default: fail(ErrorCode::PatternViolation, to_string(v) + where + " is not a canonical-form variable");
          }
        }
      }
    }
  }
};

/// Canonical system with linear maps built from a decomposition.
inline CanonicalSystem canonical_from_decomposition(const DecompositionResult& dec) {
  CanonicalSystem sys;
  sys.n = dec.n_obs;
  sys.p = static_cast<int>(dec.Bo.cols());
  sys.z0 = dec.z0;
  for (int i = 0; i < sys.n; ++i) {
    Polynomial<double> gi;
    for (int j = 0; j < sys.n; ++j)
      if (dec.Ao(i, j) != 0.0) gi.terms.push_back({dec.Ao(i, j), {{Variable::z(j + 1), 1}}});
    for (int k = 0; k < sys.p; ++k)
      if (dec.Bo(i, k) != 0.0) gi.terms.push_back({dec.Bo(i, k), {{Variable::y(0, k + 1), 1}}});
    sys.g.push_back(std::move(gi));
  }
  return sys;
}

/// Expressions of z_j(t), j = 1..n', in the history variables u[1..j],
/// y[1..j]. The last one is the recursion g.
inline std::vector<Polynomial<double>> state_expansions(const CanonicalSystem& sys,
                                                        std::size_t budget = kDefaultMonomialBudget) {
  sys.validate();
  std::vector<Polynomial<double>> shifted;  // z_j(t-1)
  std::vector<Polynomial<double>> out;
  const Polynomial<double> u1 = Polynomial<double>::variable(Variable::u(1));
  std::vector<Polynomial<double>> y1;
  for (int k = 1; k <= sys.p; ++k) y1.push_back(Polynomial<double>::variable(Variable::y(1, k)));

  for (int i = 1; i <= sys.n; ++i) {
    Polynomial<double> e = substitute(
        sys.g[static_cast<std::size_t>(i - 1)],
        [&](const Variable& v) -> const Polynomial<double>* {
          if (v.kind == VarKind::y) return &y1[static_cast<std::size_t>(v.component - 1)];
          if (v.index == sys.n) return &u1;
          return &shifted[static_cast<std::size_t>(v.index - 1)];
        },
        budget);
    shifted.push_back(shift_lags(e, 1));
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<double> simulate_canonical(const CanonicalSystem& sys, const std::vector<std::vector<double>>& ys) {
  sys.validate();
  Eigen::VectorXd z = sys.initial_state();
  std::vector<double> us;
  us.reserve(ys.size());
  Eigen::VectorXd next(sys.n);
  for (const auto& y : ys) {
    us.push_back(z(sys.n - 1));
    for (int i = 0; i < sys.n; ++i)
      next(i) = evaluate(sys.g[static_cast<std::size_t>(i)], [&](const Variable& v) -> double {
        if (v.kind == VarKind::z) return z(v.index - 1);
        return y[static_cast<std::size_t>(v.component - 1)];
      });
    z = next;
  }
  return us;
}

namespace detail {

/// Real root of sum_e coeffs[e] x^e = target of smallest magnitude.
inline std::optional<double> solve_univariate(const std::map<int, double>& coeffs, double target) {
  int degree = 0;
  for (const auto& [e, c] : coeffs)
    if (c != 0.0) degree = std::max(degree, e);
  auto coeff = [&](int e) {
    auto it = coeffs.find(e);
    return it == coeffs.end() ? 0.0 : it->second;
  };
  const double c0 = coeff(0) - target;
  if (degree == 0) {
    const double scale = 1.0 + std::fabs(target) + std::fabs(coeff(0));
    if (std::fabs(c0) <= 1e-12 * scale) return 0.0;
    return std::nullopt;
  }
  if (degree == 1) return -c0 / coeff(1);

  // Companion matrix of the monic polynomial.
  const double lead = coeff(degree);
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) comp(i, degree - 1) = -(i == 0 ? c0 : coeff(i)) / lead;
  const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();

  auto residual = [&](double x) {
    double v = 0.0;
    for (int e = degree; e >= 0; --e) v = v * x + (e == 0 ? c0 : coeff(e));
    return v;
  };
  auto derivative = [&](double x) {
    double v = 0.0;
    for (int e = degree; e >= 1; --e) v = v * x + e * coeff(e);
    return v;
  };
  std::optional<double> best;
  for (const auto& r : roots) {
    if (std::fabs(r.imag()) > 1e-7 * (1.0 + std::abs(r))) continue;
    double x = r.real();
    for (int it = 0; it < 8; ++it) {
      const double d = derivative(x);
      if (d == 0.0) break;
      x -= residual(x) / d;
    }
    if (!best || std::fabs(x) < std::fabs(*best)) best = x;
  }
  return best;
}

}  // namespace detail

/// History {u(-i), y(-i)} under which the recursion reproduces the canonical
/// output from state z0. Stage j fixes lag j so that the expansion of z_j(0)
/// equals z0_j, solving for u(-j) (inputs at that lag held at zero) or, if u
/// does not enter, for one input component.
inline IoRealization derive_initial_history(const CanonicalSystem& sys, const Eigen::VectorXd& z0,
                                            std::size_t budget = kDefaultMonomialBudget) {
  const auto E = state_expansions(sys, budget);
  if (z0.size() != sys.n) fail(ErrorCode::InvalidArgument, "z0 must have length n'");

  fixedpoint::HistoryPolynomial g{E.back(), sys.n, sys.p, false};
  IoRealization io = IoRealization::zero_history(g);
  if (z0.isZero(0.0)) return io;

  std::map<Variable, double> known;
  for (int j = 1; j <= sys.n; ++j) {
    const Polynomial<double>& G = E[static_cast<std::size_t>(j - 1)];
    const double target = z0(j - 1);
    std::vector<Variable> candidates{Variable::u(j)};
    for (int k = 1; k <= sys.p; ++k) candidates.push_back(Variable::y(j, k));

    bool solved = false;
    for (const Variable& unknown : candidates) {
      std::map<int, double> coeffs;
      for (const auto& t : G.terms) {
        double c = t.coeff;
        int e = 0;
        for (const auto& [v, k] : t.powers) {
          if (v == unknown) {
            e = k;
            continue;
          }
          auto it = known.find(v);
          c *= std::pow(it == known.end() ? 0.0 : it->second, k);
        }
        coeffs[e] += c;
      }
      if (auto x = detail::solve_univariate(coeffs, target)) {
        known[Variable::u(j)] = 0.0;
        for (int k = 1; k <= sys.p; ++k) known[Variable::y(j, k)] = 0.0;
        known[unknown] = *x;
        solved = true;
        break;
      }
    }
    if (!solved)
      fail(ErrorCode::HistoryNotDerivable,
           "no real history value reproduces z_" + std::to_string(j) + "(0) = " + std::to_string(target) +
               "; start from z0 = 0");
  }
  for (int j = 1; j <= sys.n; ++j) {
    io.u_init[static_cast<std::size_t>(j - 1)] = known[Variable::u(j)];
    for (int k = 1; k <= sys.p; ++k)
      io.y_init[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(k - 1)] = known[Variable::y(j, k)];
  }
  return io;
}

/// Linear case: history for the decomposition's z0, including the direct
/// feedthrough correction u(-i) = z_n'(-i) + D y(-i).
inline IoRealization derive_initial_history(const DecompositionResult& dec) {
  IoRealization io = io_coefficients(dec);
  const IoRealization hist = derive_initial_history(canonical_from_decomposition(dec), dec.z0);
  io.u_init = hist.u_init;
  io.y_init = hist.y_init;
  if (dec.D.size() > 0)
    for (std::size_t i = 0; i < io.u_init.size(); ++i)
      for (std::size_t k = 0; k < io.y_init[i].size(); ++k)
        io.u_init[i] += dec.D(static_cast<Eigen::Index>(k)) * io.y_init[i][k];
  return io;
}

/// Symbolic back-substitution: the recursion for z_n'(t) in normal form with
/// m = n', and the history matching the system's z0.
inline IoRealization back_substitute(const CanonicalSystem& sys, std::size_t budget = kDefaultMonomialBudget) {
  return derive_initial_history(sys, sys.initial_state(), budget);
}

/// State space -> canonical form -> recursion with consistent history.
inline IoRealization realize(const LinearController& ctrl) {
  return derive_initial_history(observable_decomposition(ctrl));
}

}  // namespace encctl::realization

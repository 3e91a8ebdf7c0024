// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Fixed-point quantization of signals and integer encoding of history
// polynomials.
//
// A real history polynomial g(u[1..m], y[1..m]) with maximum monomial degree
// d_max is encoded as an integer polynomial g_int that takes integer signals
// at scale 1/r. A degree-d coefficient c becomes round(c / (s * r^(d_max-d))),
// so that every monomial shares the output scale L = r^d_max * s and
//   L * g_int(round(v / r)) ~= g(v).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "encctl/bigint.hpp"
#include "encctl/capability.hpp"
#include "encctl/error.hpp"
#include "encctl/polynomial.hpp"

namespace encctl::fixedpoint {

struct FixedPointParams {
  double r = 1e-3;  // signal quantization step
  double s = 1e-3;  // coefficient quantization step
  double M = 1.0;   // uniform bound on |u| and |y|_inf

  /// Coefficient step defaults to the signal step.
  static FixedPointParams with_step(double r, double M) { return {r, r, M}; }

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(r)) fail(ErrorCode::InvalidArgument, "quantization step r must be finite and > 0");
    if (!positive(s)) fail(ErrorCode::InvalidArgument, "coefficient step s must be finite and > 0");
    if (!positive(M)) fail(ErrorCode::InvalidArgument, "signal bound M must be finite and > 0");
  }
};

/// Nearest integer, ties away from zero.
inline std::int64_t round_half_away(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::NonFiniteSignal, "signal is not finite");
  const double r = std::round(x);
  if (std::fabs(r) >= 9.2e18) fail(ErrorCode::QuantizationOverflow, "quantized value exceeds 64 bits");
  return static_cast<std::int64_t>(r);
}

inline std::int64_t quantize(double v, double r) {
  if (!std::isfinite(v)) fail(ErrorCode::NonFiniteSignal, "signal component is not finite");
  return round_half_away(v / r);
}

inline std::vector<std::int64_t> quantize(std::span<const double> v, double r) {
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(quantize(x, r));
  return out;
}

inline double rescale(std::int64_t u_bar_prime, double L) { return L * static_cast<double>(u_bar_prime); }
inline double rescale(const BigInt& u_bar_prime, double L) { return L * u_bar_prime.convert_to<double>(); }

/// ceil(M / r) robust to representation error in M / r (1 / 0.001 must not
/// become 1001).
inline std::int64_t ceil_ratio(double M, double r) {
  const double q = M / r;
  const double nearest = std::round(q);
  if (std::fabs(q - nearest) <= 1e-9 * std::max(1.0, std::fabs(q))) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(q));
}

/// Half-width of the admissible integer box: ceil(M / r) + 1.
inline std::int64_t input_box(const FixedPointParams& p) { return ceil_ratio(p.M, p.r) + 1; }

/// The real function g of an input-output recursion
///   u(t) = g(u(t-1..t-m), y(t-1..t-m) [, y(t)]).
struct HistoryPolynomial {
  Polynomial<double> poly;
  int m = 1;                 // memory depth
  int p = 1;                 // dimension of y
  bool feedthrough = false;  // allow y[0] (current input)

  void validate() const {
    if (m < 1) fail(ErrorCode::InvalidArgument, "memory depth must be >= 1");
    if (p < 1) fail(ErrorCode::InvalidArgument, "input dimension must be >= 1");
    for (const auto& t : poly.terms) {
      if (!std::isfinite(t.coeff)) fail(ErrorCode::InvalidArgument, "non-finite coefficient");
      for (const auto& [v, k] : t.powers) {
        switch (v.kind) {
          case VarKind::u:
            if (v.index < 1 || v.index > m)
              fail(ErrorCode::InvalidArgument, to_string(v) + " outside lags 1.." + std::to_string(m));
            break;
          case VarKind::y:
            if (v.index > m || (v.index == 0 && !feedthrough) || v.index < 0)
              fail(ErrorCode::InvalidArgument,
                   to_string(v) + (v.index == 0 ? " needs direct feedthrough enabled"
                                                : " outside lags 1.." + std::to_string(m)));
            if (v.component < 1 || v.component > p)
              fail(ErrorCode::InvalidArgument, to_string(v) + " component outside 1.." + std::to_string(p));
            break;
          default: fail(ErrorCode::InvalidArgument, to_string(v) + " is not a history variable");
        }
      }
    }
  }

  /// True when some monomial reads y[0].
  bool uses_current_input() const {
    for (const auto& v : poly.variables())
      if (v.kind == VarKind::y && v.index == 0) return true;
    return false;
  }
};

/// Decomposition of the a-priori error bound |L g_int(round(v/r)) - g(v)|.
struct ErrorBound {
  double coefficient = 0.0;  // rounding of coefficients
  double input = 0.0;        // rounding of signals, through the Lipschitz constant
  double total() const { return coefficient + input; }
};

struct EncodedController {
  Polynomial<BigInt> int_poly;
  Polynomial<double> source;  // the real polynomial that was encoded
  FixedPointParams params;
  double L = 0.0;
  int m = 1;
  int p = 1;
  bool feedthrough = false;
  int max_degree = 1;
  std::int64_t box = 0;  // admissible |integer signal|
  BigInt plaintext_bound;
  Capability required_capability;
  ErrorBound error_bound;
};

/// Upper bound of |g_int| over the integer box [-box, box] by interval
/// arithmetic: sum of |k| * box^deg.
inline BigInt interval_bound(const Polynomial<BigInt>& g, std::int64_t box) {
  BigInt bound = 0;
  for (const auto& t : g.terms) bound += abs(t.coeff) * boost::multiprecision::pow(BigInt(box), t.degree());
  return bound;
}

/// Documented a-priori error bound for encoding g at the given parameters.
inline ErrorBound encoding_error_bound(const Polynomial<double>& g, const FixedPointParams& fp) {
  const int d_max = g.max_degree();
  ErrorBound e;
  e.coefficient = fp.s * std::pow(fp.r, d_max) * static_cast<double>(g.size()) * std::pow(fp.M / fp.r + 1.0, d_max);
  // Per-variable Lipschitz bound on [-(M+r), M+r]: sum over monomials of
  // |c| * k * (M+r)^(deg-1).
  std::map<Variable, double> lipschitz;
  const double edge = fp.M + fp.r;
  for (const auto& t : g.terms)
    for (const auto& [v, k] : t.powers)
      lipschitz[v] += std::fabs(t.coeff) * k * std::pow(edge, t.degree() - 1);
  for (const auto& [v, l] : lipschitz) e.input += l * fp.r / 2.0;
  return e;
}

inline EncodedController encode_polynomial(const HistoryPolynomial& g, const FixedPointParams& fp) {
  fp.validate();
  g.validate();
  const int d_max = g.poly.max_degree();
  if (d_max == 0) fail(ErrorCode::DegenerateController, "polynomial has no signal-dependent monomial");

  EncodedController enc;
  enc.source = g.poly;
  enc.params = fp;
  enc.m = g.m;
  enc.p = g.p;
  enc.feedthrough = g.feedthrough;
  enc.max_degree = d_max;
  enc.L = std::pow(fp.r, d_max) * fp.s;
  enc.box = input_box(fp);
  enc.required_capability = Capability::for_degree(d_max);

  for (const auto& t : g.poly.terms) {
    const double divisor = fp.s * std::pow(fp.r, d_max - t.degree());
    BigInt k = round_to_bigint(t.coeff / divisor);
    if (k != 0) enc.int_poly.terms.push_back({std::move(k), t.powers});
  }
  enc.plaintext_bound = interval_bound(enc.int_poly, enc.box);
  enc.error_bound = encoding_error_bound(g.poly, fp);
  return enc;
}

/// Smallest even N with plaintext_bound < N / 2.
inline BigInt required_plaintext_modulus(const EncodedController& enc) { return 2 * (enc.plaintext_bound + 1); }

/// Smallest power of two >= the required plaintext modulus.
inline BigInt required_power_of_two_modulus(const EncodedController& enc) {
  const BigInt need = required_plaintext_modulus(enc);
  BigInt n = 2;
  while (n < need) n <<= 1;
  return n;
}

}  // namespace encctl::fixedpoint

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "encctl/error.hpp"

namespace encctl {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt abs(const BigInt& v) { return v < 0 ? BigInt(-v) : v; }

/// Narrowing conversion that refuses to wrap.
inline std::int64_t to_int64(const BigInt& v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    fail(ErrorCode::InvalidArgument, "integer " + v.str() + " does not fit in 64 bits");
  return v.convert_to<std::int64_t>();
}

/// Low 64 bits of v in two's complement, i.e. v mod 2^64.
inline std::uint64_t wrap_to_u64(const BigInt& v) {
  static const BigInt two64 = BigInt(1) << 64;
  BigInt r = v % two64;
  if (r < 0) r += two64;
  return r.convert_to<std::uint64_t>();
}

/// Round half away from zero into an arbitrary-precision integer.
inline BigInt round_to_bigint(double x) {
  if (!std::isfinite(x)) fail(ErrorCode::NonFiniteSignal, "cannot round a non-finite value");
  const double r = std::round(x);
  if (std::fabs(r) < 9.0e18) return BigInt(static_cast<std::int64_t>(r));
  return BigInt(r);
}

}  // namespace encctl

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Public-side homomorphic evaluation. Nothing in this header can see a
// secret key; controllers are built on top of it alone.

#include <algorithm>
#include <concepts>
#include <cstdint>

#include "encctl/bigint.hpp"
#include "encctl/capability.hpp"
#include "encctl/error.hpp"
#include "encctl/homcrypt/ciphertext.hpp"
#include "encctl/homcrypt/params.hpp"

namespace encctl::homcrypt {

template <class E>
concept HomomorphicEvaluator = requires(const E& e, const typename E::ciphertext_type& c, const BigInt& k) {
  typename E::ciphertext_type;
  { e.add(c, c) } -> std::same_as<typename E::ciphertext_type>;
  { e.scalar_mul(k, c) } -> std::same_as<typename E::ciphertext_type>;
  { e.mul(c, c) } -> std::same_as<typename E::ciphertext_type>;
  { e.constant(k) } -> std::same_as<typename E::ciphertext_type>;
  { e.capability() } -> std::same_as<Capability>;
  { e.plaintext_modulus() } -> std::convertible_to<std::uint64_t>;
};

/// Additively homomorphic symmetric LWE over Z_{2^64}.
class LweEvaluator {
 public:
  using ciphertext_type = LweCiphertext;

  explicit LweEvaluator(LwePublicParams params) : params_(params) { params_.validate(); }

  const LwePublicParams& params() const { return params_; }
  std::uint64_t plaintext_modulus() const { return params_.N; }
  Capability capability() const { return Capability::additive(); }

  LweCiphertext add(const LweCiphertext& x, const LweCiphertext& y) const {
    check(x);
    check(y);
    LweCiphertext out;
    out.a.resize(params_.n);
    for (std::size_t i = 0; i < params_.n; ++i) out.a[i] = x.a[i] + y.a[i];
    out.b = x.b + y.b;
    out.N = params_.N;
    return out;
  }

  /// Multiplication by an integer; noise grows by |k|.
  LweCiphertext scalar_mul(const BigInt& k, const LweCiphertext& c) const {
    return scalar_mul_wrapped(wrap_to_u64(k), c);
  }
  LweCiphertext scalar_mul(std::int64_t k, const LweCiphertext& c) const {
    return scalar_mul_wrapped(static_cast<std::uint64_t>(k), c);
  }

  [[noreturn]] LweCiphertext mul(const LweCiphertext&, const LweCiphertext&) const {
    fail(ErrorCode::CapabilityExceeded, "the LWE backend supports additions and scalar multiplications only");
  }

  /// Noiseless encryption of a public constant (a = 0).
  LweCiphertext constant(const BigInt& k) const {
    LweCiphertext out;
    out.a.assign(params_.n, 0);
    out.b = wrap_to_u64(k) * params_.delta();
    out.N = params_.N;
    return out;
  }

 private:
  LweCiphertext scalar_mul_wrapped(std::uint64_t k, const LweCiphertext& c) const {
    check(c);
    LweCiphertext out;
    out.a.resize(params_.n);
    for (std::size_t i = 0; i < params_.n; ++i) out.a[i] = c.a[i] * k;
    out.b = c.b * k;
    out.N = params_.N;
    return out;
  }

  void check(const LweCiphertext& c) const {
    if (c.a.size() != params_.n || c.N != params_.N)
      fail(ErrorCode::BackendMismatch, "ciphertext (n=" + std::to_string(c.a.size()) + ", N=" + std::to_string(c.N) +
                                           ") does not belong to this LWE instance (n=" + std::to_string(params_.n) +
                                           ", N=" + std::to_string(params_.N) + ")");
  }

  LwePublicParams params_;
};

/// Exact arithmetic in Z_N with a multiplicative depth budget.
class LeveledEvaluator {
 public:
  using ciphertext_type = LeveledCiphertext;

  explicit LeveledEvaluator(LeveledParams params) : params_(params) { params_.validate(); }

  const LeveledParams& params() const { return params_; }
  std::uint64_t plaintext_modulus() const { return params_.N; }
  int depth_cap() const { return params_.depth_cap; }
  Capability capability() const { return Capability::leveled(1 << params_.depth_cap); }

  LeveledCiphertext add(const LeveledCiphertext& x, const LeveledCiphertext& y) const {
    check(x);
    check(y);
    return make(static_cast<__int128>(x.value) + y.value, std::max(x.depth, y.depth), x.ops + y.ops + 1);
  }

  LeveledCiphertext scalar_mul(const BigInt& k, const LeveledCiphertext& c) const {
    check(c);
    const std::int64_t kr = reduce(k);
    return make(static_cast<__int128>(kr) * c.value, c.depth, c.ops + 1);
  }

  LeveledCiphertext mul(const LeveledCiphertext& x, const LeveledCiphertext& y) const {
    check(x);
    check(y);
    const std::uint32_t depth = std::max(x.depth, y.depth) + 1;
    if (depth > static_cast<std::uint32_t>(params_.depth_cap))
      fail(ErrorCode::DepthExceeded,
           "multiplication would reach depth " + std::to_string(depth) + " > cap " + std::to_string(params_.depth_cap));
    return make(static_cast<__int128>(x.value) * y.value, depth, x.ops + y.ops + 1);
  }

  LeveledCiphertext constant(const BigInt& k) const { return make(reduce(k), 0, 0); }

 private:
  std::int64_t reduce(const BigInt& k) const {
    BigInt r = k % params_.N;
    return center_mod(static_cast<__int128>(r.convert_to<std::int64_t>()), params_.N);
  }

  LeveledCiphertext make(__int128 v, std::uint32_t depth, std::uint64_t ops) const {
    LeveledCiphertext out;
    out.value = center_mod(v, params_.N);
    out.N = params_.N;
    out.depth = depth;
    out.ops = ops;
    return out;
  }

  void check(const LeveledCiphertext& c) const {
    if (c.N != params_.N)
      fail(ErrorCode::BackendMismatch, "ciphertext modulus " + std::to_string(c.N) + " differs from backend modulus " +
                                           std::to_string(params_.N));
  }

  LeveledParams params_;
};

static_assert(HomomorphicEvaluator<LweEvaluator>);
static_assert(HomomorphicEvaluator<LeveledEvaluator>);

}  // namespace encctl::homcrypt

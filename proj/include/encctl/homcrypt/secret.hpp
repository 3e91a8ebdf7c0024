// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Key-holder side: key generation, encryption, decryption and the noise
// oracle. Only sensors and actuators include this header.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include "encctl/error.hpp"
#include "encctl/homcrypt/ciphertext.hpp"
#include "encctl/homcrypt/params.hpp"
#include "encctl/homcrypt/prng.hpp"

namespace encctl::homcrypt {

struct SecretKey {
  std::vector<std::uint64_t> s;

  friend bool operator==(const SecretKey&, const SecretKey&) = default;
};

inline SecretKey keygen(const LweParams& params) {
  params.validate();
  Prng rng(params.seed, Stream::key);
  SecretKey sk;
  sk.s.resize(params.pub.n);
  for (auto& v : sk.s) v = rng.next();
  return sk;
}

namespace detail {

inline std::uint64_t phase(const LweCiphertext& c, const SecretKey& sk) {
  std::uint64_t acc = c.b;
  for (std::size_t i = 0; i < c.a.size(); ++i) acc -= c.a[i] * sk.s[i];
  return acc;
}

inline void check_key(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk) {
  if (sk.s.size() != p.n) fail(ErrorCode::BackendMismatch, "secret key length differs from lattice dimension");
  if (c.a.size() != p.n || c.N != p.N) fail(ErrorCode::BackendMismatch, "ciphertext does not match LWE parameters");
}

}  // namespace detail

inline LweCiphertext encrypt(const LwePublicParams& p, std::int64_t m, const SecretKey& sk, Prng& rng) {
  if (!in_plaintext_range(m, p.N))
    fail(ErrorCode::PlaintextOutOfRange, std::to_string(m) + " outside [-N/2, N/2) for N = " + std::to_string(p.N));
  if (sk.s.size() != p.n) fail(ErrorCode::BackendMismatch, "secret key length differs from lattice dimension");
  LweCiphertext c;
  c.a.resize(p.n);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < p.n; ++i) {
    c.a[i] = rng.next();
    acc += c.a[i] * sk.s[i];
  }
  const auto e = static_cast<std::uint64_t>(rng.centered_binomial(p.noise_bound));
  c.b = acc + static_cast<std::uint64_t>(m) * p.delta() + e;
  c.N = p.N;
  c.fresh = true;
  return c;
}

/// Rounds the phase to the nearest multiple of q/N. Exact while
/// |noise| < q/(2N); beyond that the result is silently wrong.
inline std::int64_t decrypt(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk) {
  detail::check_key(p, c, sk);
  const std::uint64_t ph = detail::phase(c, sk);
  const std::uint64_t m = ((ph + p.delta() / 2) >> p.delta_bits()) & (p.N - 1);
  return center_mod(static_cast<__int128>(m), p.N);
}

/// Exact noise e = phase - (q/N) Dec(c), centered.
inline std::int64_t noise(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk) {
  const std::int64_t m = decrypt(p, c, sk);
  return static_cast<std::int64_t>(detail::phase(c, sk) - static_cast<std::uint64_t>(m) * p.delta());
}

/// Exact noise e = phase - (q/N) m against the plaintext m the ciphertext is
/// supposed to carry. Unlike noise(), this exposes noise that has grown past
/// q/(2N) and silently shifted the decryption.
inline std::int64_t noise(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk, std::int64_t m) {
  detail::check_key(p, c, sk);
  return static_cast<std::int64_t>(detail::phase(c, sk) - static_cast<std::uint64_t>(m) * p.delta());
}

inline double budget_bits(const LwePublicParams& p, std::int64_t e) {
  const double mag = e == std::numeric_limits<std::int64_t>::min() ? 0x1p63 : std::fabs(static_cast<double>(e));
  return static_cast<double>(p.delta_bits() - 1) - std::log2(mag + 1.0);
}

/// log2(q/2N) - log2(|e| + 1) bits with e measured against the decryption,
/// i.e. the distance to the nearest codeword. It cannot tell an overflowed
/// ciphertext from a clean one; use the overload with the expected plaintext
/// for that.
inline double noise_budget(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk) {
  return budget_bits(p, noise(p, c, sk));
}

/// Budget against the expected plaintext m: positive iff Dec(c) = m.
inline double noise_budget(const LwePublicParams& p, const LweCiphertext& c, const SecretKey& sk, std::int64_t m) {
  return budget_bits(p, noise(p, c, sk, m));
}

template <class C>
concept EncryptionClient = requires(const C& c, std::int64_t m, Prng& rng, const typename C::ciphertext_type& ct) {
  typename C::ciphertext_type;
  { c.encrypt(m, rng) } -> std::same_as<typename C::ciphertext_type>;
  { c.decrypt(ct) } -> std::same_as<std::int64_t>;
  { c.noise_budget(ct) } -> std::same_as<double>;
  { c.noise_budget(ct, m) } -> std::same_as<double>;
  { c.plaintext_modulus() } -> std::convertible_to<std::uint64_t>;
};

/// Holds the secret key; lives with sensors and actuators.
class LweClient {
 public:
  using ciphertext_type = LweCiphertext;

  LweClient(LwePublicParams params, SecretKey sk) : params_(params), sk_(std::move(sk)) {
    params_.validate();
    if (sk_.s.size() != params_.n) fail(ErrorCode::BackendMismatch, "secret key length differs from lattice dimension");
  }
  explicit LweClient(const LweParams& params) : LweClient(params.pub, keygen(params)) {}

  const LwePublicParams& params() const { return params_; }
  std::uint64_t plaintext_modulus() const { return params_.N; }
  const SecretKey& secret_key() const { return sk_; }

  LweCiphertext encrypt(std::int64_t m, Prng& rng) const { return homcrypt::encrypt(params_, m, sk_, rng); }
  std::int64_t decrypt(const LweCiphertext& c) const { return homcrypt::decrypt(params_, c, sk_); }
  std::int64_t noise(const LweCiphertext& c) const { return homcrypt::noise(params_, c, sk_); }
  double noise_budget(const LweCiphertext& c) const { return homcrypt::noise_budget(params_, c, sk_); }
  double noise_budget(const LweCiphertext& c, std::int64_t expected) const {
    return homcrypt::noise_budget(params_, c, sk_, expected);
  }

 private:
  LwePublicParams params_;
  SecretKey sk_;
};

/// Reference-backend counterpart; there is no key.
class LeveledClient {
 public:
  using ciphertext_type = LeveledCiphertext;

  explicit LeveledClient(LeveledParams params) : params_(params) { params_.validate(); }

  std::uint64_t plaintext_modulus() const { return params_.N; }

  LeveledCiphertext encrypt(std::int64_t m, Prng&) const {
    if (!in_plaintext_range(m, params_.N))
      fail(ErrorCode::PlaintextOutOfRange,
           std::to_string(m) + " outside [-N/2, N/2) for N = " + std::to_string(params_.N));
    LeveledCiphertext c;
    c.value = m;
    c.N = params_.N;
    c.fresh = true;
    return c;
  }

  std::int64_t decrypt(const LeveledCiphertext& c) const {
    if (c.N != params_.N) fail(ErrorCode::BackendMismatch, "ciphertext modulus differs from backend modulus");
    return c.value;
  }

  double noise_budget(const LeveledCiphertext&) const { return std::numeric_limits<double>::infinity(); }
  double noise_budget(const LeveledCiphertext&, std::int64_t) const { return std::numeric_limits<double>::infinity(); }

 private:
  LeveledParams params_;
};

static_assert(EncryptionClient<LweClient>);
static_assert(EncryptionClient<LeveledClient>);

}  // namespace encctl::homcrypt

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <random>
#include <string>

#include "encctl/error.hpp"

namespace encctl::homcrypt {

using Seed = std::array<std::uint8_t, 32>;

/// Expands a 64-bit user seed into a 32-byte seed.
inline Seed seed_from_u64(std::uint64_t v) {
  std::seed_seq seq{static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v >> 32), 0x656e6363u};
  std::array<std::uint32_t, 8> words{};
  seq.generate(words.begin(), words.end());
  Seed out{};
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t b = 0; b < 4; ++b) out[4 * i + b] = static_cast<std::uint8_t>(words[i] >> (8 * b));
  return out;
}

/// What the controller side may know about an LWE instance. q is fixed at
/// 2^64 (native wrapping arithmetic).
struct LwePublicParams {
  std::size_t n = 1024;                    // lattice dimension
  std::uint64_t N = std::uint64_t{1} << 20;  // plaintext modulus, power of two
  std::uint64_t noise_bound = 16;          // fresh noise lies in [-B, B]

  /// q / N
  std::uint64_t delta() const { return std::uint64_t{1} << delta_bits(); }
  int delta_bits() const { return 64 - std::countr_zero(N); }

  void validate() const {
    if (n == 0) fail(ErrorCode::InvalidArgument, "lattice dimension must be positive");
    if (N < 2 || !std::has_single_bit(N) || N > (std::uint64_t{1} << 32))
      fail(ErrorCode::InvalidArgument, "plaintext modulus must be a power of two in [2, 2^32], got " + std::to_string(N));
    if (noise_bound == 0) fail(ErrorCode::InvalidArgument, "noise bound must be positive");
    if (noise_bound >= delta() / 2)
      fail(ErrorCode::InvalidArgument, "noise bound must stay below q / (2N) for fresh ciphertexts to decrypt");
  }

  friend bool operator==(const LwePublicParams&, const LwePublicParams&) = default;
};

/// Full parameter set; the seed determines the secret key and every random
/// draw, so it stays on the key-holder side.
struct LweParams {
  LwePublicParams pub;
  Seed seed{};

  void validate() const { pub.validate(); }
};

/// Exact-integer reference backend with bounded multiplicative depth. It keeps
/// plaintexts in the clear and offers no secrecy.
struct LeveledParams {
  std::uint64_t N = std::uint64_t{1} << 40;  // even, at most 2^62
  int depth_cap = 2;

  void validate() const {
    if (N < 2 || N % 2 != 0 || N > (std::uint64_t{1} << 62))
      fail(ErrorCode::InvalidArgument, "leveled plaintext modulus must be even and in [2, 2^62]");
    if (depth_cap < 0 || depth_cap > 30) fail(ErrorCode::InvalidArgument, "depth cap must be in [0, 30]");
  }

  friend bool operator==(const LeveledParams&, const LeveledParams&) = default;
};

/// Maps any integer into the centered residue system [-N/2, N/2).
inline std::int64_t center_mod(__int128 v, std::uint64_t N) {
  const __int128 n = static_cast<__int128>(N);
  __int128 r = v % n;
  if (r < 0) r += n;
  if (r >= n / 2) r -= n;
  return static_cast<std::int64_t>(r);
}

inline bool in_plaintext_range(std::int64_t m, std::uint64_t N) {
  const __int128 half = static_cast<__int128>(N) / 2;
  return m >= -half && m < half;
}

}  // namespace encctl::homcrypt

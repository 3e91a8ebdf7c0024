// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "encctl/homcrypt/params.hpp"

namespace encctl::homcrypt {

/// Well-known stream ids. Parallel users must take distinct streams.
enum class Stream : std::uint64_t { key = 0, sensor = 1, actuator = 2, test = 99 };

/// Deterministic generator for masks and noise, keyed by (seed, stream id).
/// Mersenne Twister: reproducible but not a CSPRNG, so deployments at this
/// scale are illustrative only.
class Prng {
 public:
  Prng(const Seed& seed, std::uint64_t stream) {
    std::vector<std::uint32_t> words;
    words.reserve(10);
    for (std::size_t i = 0; i < seed.size(); i += 4)
      words.push_back(std::uint32_t{seed[i]} | std::uint32_t{seed[i + 1]} << 8 | std::uint32_t{seed[i + 2]} << 16 |
                      std::uint32_t{seed[i + 3]} << 24);
    words.push_back(static_cast<std::uint32_t>(stream));
    words.push_back(static_cast<std::uint32_t>(stream >> 32));
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }
  Prng(const Seed& seed, Stream stream) : Prng(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t next() { return engine_(); }

  /// Centered binomial sample with support [-B, B]: difference of two sums of
  /// B fair bits.
  std::int64_t centered_binomial(std::uint64_t B) {
    auto count_bits = [this](std::uint64_t bits) {
      std::int64_t c = 0;
      while (bits >= 64) {
        c += std::popcount(next());
        bits -= 64;
      }
      if (bits > 0) c += std::popcount(next() & ((std::uint64_t{1} << bits) - 1));
      return c;
    };
    const std::int64_t plus = count_bits(B);
    const std::int64_t minus = count_bits(B);
    return plus - minus;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace encctl::homcrypt

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace encctl::homcrypt {

/// b = <a, s> + (q/N) m + e  mod 2^64.
///
/// `fresh` is set only by encryption and cleared by every homomorphic
/// operation; controllers refuse to consume non-fresh inputs.
struct LweCiphertext {
  std::vector<std::uint64_t> a;
  std::uint64_t b = 0;
  std::uint64_t N = 0;
  bool fresh = false;

  friend bool operator==(const LweCiphertext&, const LweCiphertext&) = default;
};

/// Reference-backend ciphertext: plaintext in the clear plus operation
/// accounting.
struct LeveledCiphertext {
  std::int64_t value = 0;  // centered residue of Z_N
  std::uint64_t N = 0;
  std::uint32_t depth = 0;
  std::uint64_t ops = 0;
  bool fresh = false;

  friend bool operator==(const LeveledCiphertext&, const LeveledCiphertext&) = default;
};

}  // namespace encctl::homcrypt

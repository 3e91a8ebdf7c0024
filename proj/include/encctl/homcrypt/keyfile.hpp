// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "encctl/homcrypt/params.hpp"
#include "encctl/homcrypt/secret.hpp"
#include "encctl/homcrypt/wire.hpp"

namespace encctl::homcrypt {

struct KeyFile {
  LwePublicParams params;  // only n and N are stored
  SecretKey key;
};

inline std::vector<std::uint8_t> serialize_key(const SecretKey& sk, std::uint64_t N) {
  return detail::write_frame(kTagKey, N, sk.s, static_cast<std::uint32_t>(sk.s.size()));
}

inline KeyFile deserialize_key(std::span<const std::uint8_t> in) {
  if (in.empty() || in[0] != kTagKey) fail(ErrorCode::ParseError, "not a secret key file");
  detail::Frame f = detail::read_frame(in, 0);
  KeyFile out;
  out.params.n = f.n;
  out.params.N = f.N;
  out.key.s = std::move(f.words);
  return out;
}

inline void save_key(const std::string& path, const SecretKey& sk, std::uint64_t N) {
  write_file(path, serialize_key(sk, N));
}

inline KeyFile load_key(const std::string& path) { return deserialize_key(read_file(path)); }

}  // namespace encctl::homcrypt

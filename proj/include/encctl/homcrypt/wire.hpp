// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Binary encodings, all little-endian.
//
// Ciphertext: tag (1 byte) | n (4 bytes) | N (8 bytes) | a[0..n) | b
//   tag low 7 bits: 1 = LWE, 2 = leveled; bit 7 = freshness flag.
//   Leveled ciphertexts use n = 2 with a = [depth, ops] and b = value (two's
//   complement).
// Secret key: tag 0x10 | n | N | s[0..n)

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "encctl/error.hpp"
#include "encctl/homcrypt/ciphertext.hpp"

namespace encctl::homcrypt {

inline constexpr std::uint8_t kTagLwe = 0x01;
inline constexpr std::uint8_t kTagLeveled = 0x02;
inline constexpr std::uint8_t kTagKey = 0x10;
inline constexpr std::uint8_t kFreshBit = 0x80;
inline constexpr std::size_t kHeaderBytes = 13;

namespace detail {

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{in[at + i]} << (8 * i);
  return v;
}

struct Frame {
  std::uint8_t tag = 0;
  std::uint32_t n = 0;
  std::uint64_t N = 0;
  std::vector<std::uint64_t> words;
};

inline std::vector<std::uint8_t> write_frame(std::uint8_t tag, std::uint64_t N, std::span<const std::uint64_t> words,
                                             std::uint32_t n) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * words.size());
  out.push_back(tag);
  put_le(out, n, 4);
  put_le(out, N, 8);
  for (std::uint64_t w : words) put_le(out, w, 8);
  return out;
}

inline Frame read_frame(std::span<const std::uint8_t> in, std::size_t extra_words) {
  if (in.size() < kHeaderBytes) fail(ErrorCode::ParseError, "truncated header");
  Frame f;
  f.tag = in[0];
  f.n = static_cast<std::uint32_t>(get_le(in, 1, 4));
  f.N = get_le(in, 5, 8);
  const std::size_t count = std::size_t{f.n} + extra_words;
  if (in.size() != kHeaderBytes + 8 * count)
    fail(ErrorCode::ParseError, "expected " + std::to_string(kHeaderBytes + 8 * count) + " bytes, got " +
                                    std::to_string(in.size()));
  f.words.resize(count);
  for (std::size_t i = 0; i < count; ++i) f.words[i] = get_le(in, kHeaderBytes + 8 * i, 8);
  return f;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const LweCiphertext& c) {
  std::vector<std::uint64_t> words(c.a);
  words.push_back(c.b);
  const std::uint8_t tag = kTagLwe | (c.fresh ? kFreshBit : 0);
  return detail::write_frame(tag, c.N, words, static_cast<std::uint32_t>(c.a.size()));
}

inline std::vector<std::uint8_t> serialize(const LeveledCiphertext& c) {
  const std::uint64_t words[3] = {c.depth, c.ops, static_cast<std::uint64_t>(c.value)};
  const std::uint8_t tag = kTagLeveled | (c.fresh ? kFreshBit : 0);
  return detail::write_frame(tag, c.N, words, 2);
}

using AnyCiphertext = std::variant<LweCiphertext, LeveledCiphertext>;

inline AnyCiphertext deserialize(std::span<const std::uint8_t> in) {
  if (in.empty()) fail(ErrorCode::ParseError, "empty ciphertext");
  const std::uint8_t kind = in[0] & ~kFreshBit;
  const bool fresh = (in[0] & kFreshBit) != 0;
  if (kind == kTagLwe) {
    detail::Frame f = detail::read_frame(in, 1);
    LweCiphertext c;
    c.b = f.words.back();
    f.words.pop_back();
    c.a = std::move(f.words);
    c.N = f.N;
    c.fresh = fresh;
    return c;
  }
  if (kind == kTagLeveled) {
    detail::Frame f = detail::read_frame(in, 1);
    if (f.n != 2) fail(ErrorCode::ParseError, "leveled ciphertext must carry n = 2");
    LeveledCiphertext c;
    c.depth = static_cast<std::uint32_t>(f.words[0]);
    c.ops = f.words[1];
    c.value = static_cast<std::int64_t>(f.words[2]);
    c.N = f.N;
    c.fresh = fresh;
    return c;
  }
  fail(ErrorCode::ParseError, "unknown ciphertext tag " + std::to_string(in[0]));
}

template <class Ct>
Ct deserialize_as(std::span<const std::uint8_t> in) {
  AnyCiphertext any = deserialize(in);
  if (auto* c = std::get_if<Ct>(&any)) return std::move(*c);
  fail(ErrorCode::BackendMismatch, "ciphertext belongs to a different backend");
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(ErrorCode::IoError, "failed writing " + path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), {});
}

}  // namespace encctl::homcrypt

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Pre-deployment checks that one controller evaluation on fresh ciphertexts
// always decrypts exactly: the plaintext range, the backend capability, and
// (LWE) the worst-case noise.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "encctl/bigint.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/homcrypt/params.hpp"

namespace encctl::homcrypt {

struct Certificate {
  std::string backend;
  std::uint64_t N = 0;
  BigInt required_N;
  bool plaintext_ok = false;
  bool capability_ok = false;
  bool noise_ok = true;
  BigInt worst_case_noise = 0;  // LWE only
  BigInt noise_limit = 0;       // q / (2N), LWE only
  double plaintext_margin_bits = 0.0;
  double noise_margin_bits = 0.0;
  std::vector<std::string> problems;

  bool ok() const { return plaintext_ok && capability_ok && noise_ok; }
};

namespace detail {

inline double log2_big(const BigInt& v) {
  if (v <= 0) return -INFINITY;
  return std::log2(v.convert_to<double>());
}

inline void check_plaintext(Certificate& cert, const fixedpoint::EncodedController& enc) {
  cert.required_N = fixedpoint::required_plaintext_modulus(enc);
  cert.plaintext_ok = BigInt(cert.N) >= cert.required_N;
  cert.plaintext_margin_bits = std::log2(static_cast<double>(cert.N) / 2.0) - log2_big(enc.plaintext_bound + 1);
  if (!cert.plaintext_ok)
    cert.problems.push_back("plaintext modulus N = " + std::to_string(cert.N) + " is below the required " +
                            cert.required_N.str() + "; increase N or shrink M / r");
}

}  // namespace detail

inline Certificate certify(const fixedpoint::EncodedController& enc, const LwePublicParams& p) {
  p.validate();
  Certificate cert;
  cert.backend = "lwe";
  cert.N = p.N;
  detail::check_plaintext(cert, enc);

  cert.capability_ok = Capability::additive().covers(enc.required_capability);
  if (!cert.capability_ok)
    cert.problems.push_back("controller needs " + enc.required_capability.to_string() +
                            " but the LWE backend is additive only; use the leveled backend");

  for (const auto& t : enc.int_poly.terms)
    if (t.degree() == 1) cert.worst_case_noise += abs(t.coeff) * p.noise_bound;
  cert.noise_limit = BigInt(p.delta() / 2);
  cert.noise_ok = cert.worst_case_noise < cert.noise_limit;
  cert.noise_margin_bits = detail::log2_big(cert.noise_limit) - std::log2(cert.worst_case_noise.convert_to<double>() + 1.0);
  if (!cert.noise_ok)
    cert.problems.push_back("worst-case noise " + cert.worst_case_noise.str() + " reaches q/(2N) = " +
                            cert.noise_limit.str() + "; lower N or the noise bound");
  return cert;
}

inline Certificate certify(const fixedpoint::EncodedController& enc, const LeveledParams& p) {
  p.validate();
  Certificate cert;
  cert.backend = "leveled";
  cert.N = p.N;
  detail::check_plaintext(cert, enc);
  const int need = multiplicative_depth(enc.max_degree);
  cert.capability_ok = need <= p.depth_cap;
  if (!cert.capability_ok)
    cert.problems.push_back("controller needs multiplicative depth " + std::to_string(need) + " but the cap is " +
                            std::to_string(p.depth_cap));
  cert.noise_margin_bits = INFINITY;
  return cert;
}

}  // namespace encctl::homcrypt

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Key-holding endpoints of the loop. The sensor encrypts y_bar(t); the
// actuator decrypts the controller output, rescales, requantizes and sends a
// fresh encryption of u_bar(t) back.

#include <cstdint>
#include <span>
#include <vector>

#include "encctl/fixedpoint.hpp"
#include "encctl/homcrypt/prng.hpp"
#include "encctl/homcrypt/secret.hpp"
#include "encctl/runtime/quantized.hpp"

namespace encctl::runtime {

template <homcrypt::EncryptionClient Client>
class Sensor {
 public:
  using ciphertext_type = typename Client::ciphertext_type;

  Sensor(const Client& client, homcrypt::Prng rng) : client_(&client), rng_(std::move(rng)) {}

  std::vector<ciphertext_type> encrypt(std::span<const std::int64_t> y_bar) {
    std::vector<ciphertext_type> out;
    out.reserve(y_bar.size());
    for (auto v : y_bar) out.push_back(client_->encrypt(v, rng_));
    return out;
  }

 private:
  const Client* client_;
  homcrypt::Prng rng_;
};

template <class Ct>
struct ActuatorOutput {
  std::int64_t u_bar_prime = 0;  // Dec(c)
  double u_q = 0.0;              // L * Dec(c)
  std::int64_t u_bar = 0;        // round(u_q / r)
  double noise_budget_bits = 0.0;
  Ct fresh;
};

template <homcrypt::EncryptionClient Client>
class Actuator {
 public:
  using ciphertext_type = typename Client::ciphertext_type;

  Actuator(const Client& client, homcrypt::Prng rng, double L, double r, std::int64_t box)
      : client_(&client), rng_(std::move(rng)), L_(L), r_(r), box_(box) {}

  ActuatorOutput<ciphertext_type> process(const ciphertext_type& c) {
    ActuatorOutput<ciphertext_type> out;
    out.noise_budget_bits = client_->noise_budget(c);
    out.u_bar_prime = client_->decrypt(c);
    out.u_q = fixedpoint::rescale(out.u_bar_prime, L_);
    out.u_bar = fixedpoint::quantize(out.u_q, r_);
    check_box(out.u_bar, box_, "decrypted u_bar");
    out.fresh = client_->encrypt(out.u_bar, rng_);
    return out;
  }

  ciphertext_type encrypt(std::int64_t v) { return client_->encrypt(v, rng_); }

 private:
  const Client* client_;
  homcrypt::Prng rng_;
  double L_;
  double r_;
  std::int64_t box_;
};

}  // namespace encctl::runtime

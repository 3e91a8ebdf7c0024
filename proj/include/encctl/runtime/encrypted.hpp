// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// The controller over ciphertexts. It evaluates the public integer polynomial
// on freshly encrypted histories and never sees a secret key: only the
// public evaluator header is included here.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "encctl/bigint.hpp"
#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/history_buffer.hpp"
#include "encctl/homcrypt/evaluator.hpp"

namespace encctl::runtime {

template <homcrypt::HomomorphicEvaluator Evaluator>
class EncryptedController {
 public:
  using ciphertext_type = typename Evaluator::ciphertext_type;

  /// u_init[i-1] = Enc(u_bar(-i)); y_init[i-1][k] = Enc(y_bar(-i)_k).
  EncryptedController(Evaluator evaluator, const fixedpoint::EncodedController& enc,
                      std::vector<ciphertext_type> u_init, std::vector<std::vector<ciphertext_type>> y_init)
      : eval_(std::move(evaluator)), g_(enc.int_poly), m_(enc.m), p_(enc.p) {
    if (!eval_.capability().covers(enc.required_capability))
      fail(ErrorCode::CapabilityExceeded, "controller needs " + enc.required_capability.to_string() +
                                              " but the backend offers " + eval_.capability().to_string());
    if (u_init.size() != static_cast<std::size_t>(m_) || y_init.size() != static_cast<std::size_t>(m_))
      fail(ErrorCode::InvalidArgument, "initial history must have depth m = " + std::to_string(m_));
    for (const auto& c : u_init) require_fresh(c, "initial u");
    for (const auto& y : y_init) check_input(y);
    u_hist_ = HistoryBuffer<ciphertext_type>(std::move(u_init));
    y_hist_ = HistoryBuffer<std::vector<ciphertext_type>>(std::move(y_init));
  }

  const Evaluator& evaluator() const { return eval_; }
  std::uint64_t t() const { return t_; }
  /// Number of stored or current-input ciphertexts verified fresh before use.
  std::uint64_t fresh_inputs_consumed() const { return fresh_consumed_; }

  /// Homomorphic evaluation of g_int: monomials in stored order, left-fold
  /// additions, balanced products within a monomial. The result is not fresh
  /// and must go to the actuator, never back into a controller.
  ciphertext_type step(std::span<const ciphertext_type> y_now = {}) {
    if (g_.empty()) return eval_.constant(BigInt(0));
    std::optional<ciphertext_type> acc;
    for (const auto& t : g_.terms) {
      ciphertext_type term = monomial(t, y_now);
      acc = acc ? eval_.add(*acc, term) : std::move(term);
    }
    return std::move(*acc);
  }

  /// Accepts u_bar(t) re-encrypted by the actuator and y_bar(t) encrypted by
  /// the sensor; both must be fresh.
  void feedback(ciphertext_type u_fresh, std::vector<ciphertext_type> y_fresh) {
    require_fresh(u_fresh, "u");
    check_input(y_fresh);
    u_hist_.push(std::move(u_fresh));
    y_hist_.push(std::move(y_fresh));
    ++t_;
  }

 private:
  const ciphertext_type& input(const Variable& v, std::span<const ciphertext_type> y_now) {
    const ciphertext_type* c = nullptr;
    if (v.kind == VarKind::u) {
      c = &u_hist_.at(v.index);
    } else if (v.index == 0) {
      if (y_now.size() != static_cast<std::size_t>(p_))
        fail(ErrorCode::InvalidArgument, "current input required for direct feedthrough");
      c = &y_now[static_cast<std::size_t>(v.component - 1)];
    } else {
      c = &y_hist_.at(v.index)[static_cast<std::size_t>(v.component - 1)];
    }
    require_fresh(*c, to_string(v).c_str());
    ++fresh_consumed_;
    return *c;
  }

  ciphertext_type monomial(const Monomial<BigInt>& t, std::span<const ciphertext_type> y_now) {
    if (t.powers.empty()) return eval_.constant(t.coeff);
    if (t.degree() == 1) return eval_.scalar_mul(t.coeff, input(t.powers.front().first, y_now));
    std::vector<ciphertext_type> factors;
    for (const auto& [v, k] : t.powers)
      for (int i = 0; i < k; ++i) factors.push_back(input(v, y_now));
    while (factors.size() > 1) {
      std::vector<ciphertext_type> next;
      for (std::size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(eval_.mul(factors[i], factors[i + 1]));
      if (factors.size() % 2 == 1) next.push_back(std::move(factors.back()));
      factors = std::move(next);
    }
    return eval_.scalar_mul(t.coeff, factors.front());
  }

  void check_input(const std::vector<ciphertext_type>& y) const {
    if (y.size() != static_cast<std::size_t>(p_)) fail(ErrorCode::InvalidArgument, "encrypted input dimension");
    for (const auto& c : y) require_fresh(c, "y");
  }

  static void require_fresh(const ciphertext_type& c, const char* what) {
    if (!c.fresh)
      fail(ErrorCode::StaleCiphertext, std::string(what) +
                                           ": ciphertext was produced by homomorphic evaluation; controllers accept "
                                           "newly encrypted messages only");
  }

  Evaluator eval_;
  Polynomial<BigInt> g_;
  int m_;
  int p_;
  HistoryBuffer<ciphertext_type> u_hist_;
  HistoryBuffer<std::vector<ciphertext_type>> y_hist_;
  std::uint64_t t_ = 0;
  std::uint64_t fresh_consumed_ = 0;
};

}  // namespace encctl::runtime

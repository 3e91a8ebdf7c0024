// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "encctl/bigint.hpp"
#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/history_buffer.hpp"

namespace encctl::runtime {

inline void check_box(std::int64_t v, std::int64_t box, const char* what) {
  if (v > box || v < -box)
    fail(ErrorCode::SignalBoundViolated, std::string(what) + " = " + std::to_string(v) +
                                             " left the admissible box [-" + std::to_string(box) + ", " +
                                             std::to_string(box) + "]; the loop exceeded the bound M");
}

/// Integer histories quantized from a real IO history.
struct QuantizedHistory {
  std::vector<std::int64_t> u;               // u[i-1] = u_bar(-i)
  std::vector<std::vector<std::int64_t>> y;  // y[i-1] = y_bar(-i)
};

inline QuantizedHistory quantize_history(const std::vector<double>& u, const std::vector<std::vector<double>>& y,
                                         double r) {
  QuantizedHistory q;
  for (double v : u) q.u.push_back(fixedpoint::quantize(v, r));
  for (const auto& v : y) q.y.push_back(fixedpoint::quantize(v, r));
  return q;
}

/// The controller over integers:
///   u_bar'(t) = g_int(u_bar(t-1..t-m), y_bar(t-1..t-m)),  u_q(t) = L u_bar'(t),
///   u_bar(t)  = round(u_q(t) / r).
class QuantizedController {
 public:
  struct Output {
    std::int64_t u_bar_prime = 0;
    double u_q = 0.0;
  };

  QuantizedController(fixedpoint::EncodedController enc, const BigInt& plaintext_modulus, const QuantizedHistory& init)
      : enc_(std::move(enc)), half_N_(plaintext_modulus / 2), u_hist_(init.u), y_hist_(init.y) {
    if (init.u.size() != static_cast<std::size_t>(enc_.m) || init.y.size() != static_cast<std::size_t>(enc_.m))
      fail(ErrorCode::InvalidArgument, "initial history must have depth m = " + std::to_string(enc_.m));
    for (auto v : init.u) check_box(v, enc_.box, "initial u_bar");
    for (const auto& y : init.y) {
      if (y.size() != static_cast<std::size_t>(enc_.p)) fail(ErrorCode::InvalidArgument, "initial y_bar dimension");
      for (auto v : y) check_box(v, enc_.box, "initial y_bar");
    }
  }

  const fixedpoint::EncodedController& encoded() const { return enc_; }
  std::uint64_t t() const { return t_; }
  const HistoryBuffer<std::int64_t>& u_history() const { return u_hist_; }
  const HistoryBuffer<std::vector<std::int64_t>>& y_history() const { return y_hist_; }

  /// Exact evaluation; does not change the state. `y_now` is needed only
  /// with direct feedthrough.
  Output step(std::span<const std::int64_t> y_now = {}) const {
    const BigInt v = evaluate(enc_.int_poly, [&](const Variable& var) -> BigInt {
      if (var.kind == VarKind::u) return BigInt(u_hist_.at(var.index));
      if (var.index == 0) {
        if (y_now.size() != static_cast<std::size_t>(enc_.p))
          fail(ErrorCode::InvalidArgument, "current input required for direct feedthrough");
        return BigInt(y_now[static_cast<std::size_t>(var.component - 1)]);
      }
      return BigInt(y_hist_.at(var.index)[static_cast<std::size_t>(var.component - 1)]);
    });
    if (v >= half_N_ || v < -half_N_)
      fail(ErrorCode::PlaintextOverflow, "u_bar' = " + v.str() + " does not fit Z_N with N/2 = " + half_N_.str() +
                                             "; M or N is mis-sized");
    Output out;
    out.u_bar_prime = v.convert_to<std::int64_t>();
    out.u_q = fixedpoint::rescale(out.u_bar_prime, enc_.L);
    return out;
  }

  /// Pushes u_bar(t) = round(u_q / r) and y_bar(t); returns u_bar(t).
  std::int64_t feedback(double u_q, std::span<const std::int64_t> y_new) {
    const std::int64_t u_bar = fixedpoint::quantize(u_q, enc_.params.r);
    check_box(u_bar, enc_.box, "u_bar");
    if (y_new.size() != static_cast<std::size_t>(enc_.p)) fail(ErrorCode::InvalidArgument, "y_bar dimension");
    for (auto v : y_new) check_box(v, enc_.box, "y_bar");
    u_hist_.push(u_bar);
    y_hist_.push(std::vector<std::int64_t>(y_new.begin(), y_new.end()));
    ++t_;
    return u_bar;
  }

 private:
  fixedpoint::EncodedController enc_;
  BigInt half_N_;
  HistoryBuffer<std::int64_t> u_hist_;
  HistoryBuffer<std::vector<std::int64_t>> y_hist_;
  std::uint64_t t_ = 0;
};

}  // namespace encctl::runtime

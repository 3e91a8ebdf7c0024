// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/history_buffer.hpp"
#include "encctl/polynomial.hpp"

namespace encctl::realization {

/// u(t) = g(u(t-1..t-m), y(t-1..t-m)) with its initial history.
struct IoRealization {
  fixedpoint::HistoryPolynomial g;
  std::vector<double> u_init;               // u_init[i-1] = u(-i)
  std::vector<std::vector<double>> y_init;  // y_init[i-1] = y(-i)

  void validate() const {
    g.validate();
    if (u_init.size() != static_cast<std::size_t>(g.m) || y_init.size() != static_cast<std::size_t>(g.m))
      fail(ErrorCode::InvalidArgument, "initial history length must equal the memory depth " + std::to_string(g.m));
    for (const auto& y : y_init)
      if (y.size() != static_cast<std::size_t>(g.p))
        fail(ErrorCode::InvalidArgument, "initial input history has the wrong dimension");
  }

  static IoRealization zero_history(fixedpoint::HistoryPolynomial g) {
    IoRealization io;
    io.u_init.assign(static_cast<std::size_t>(g.m), 0.0);
    io.y_init.assign(static_cast<std::size_t>(g.m), std::vector<double>(static_cast<std::size_t>(g.p), 0.0));
    io.g = std::move(g);
    return io;
  }
};

/// The recursion in real arithmetic (nominal controller).
class RealRecursion {
 public:
  explicit RealRecursion(const IoRealization& io)
      : g_(io.g), u_hist_(io.u_init), y_hist_(io.y_init) {
    io.validate();
  }

  /// u(t); `y_now` is required only when g reads y[0].
  double step(std::span<const double> y_now = {}) const {
    return evaluate(g_.poly, [&](const Variable& v) -> double {
      if (v.kind == VarKind::u) return u_hist_.at(v.index);
      if (v.index == 0) {
        if (y_now.size() != static_cast<std::size_t>(g_.p))
          fail(ErrorCode::InvalidArgument, "current input required for direct feedthrough");
        return y_now[static_cast<std::size_t>(v.component - 1)];
      }
      return y_hist_.at(v.index)[static_cast<std::size_t>(v.component - 1)];
    });
  }

  void feedback(double u, std::span<const double> y) {
    if (y.size() != static_cast<std::size_t>(g_.p)) fail(ErrorCode::InvalidArgument, "input has the wrong dimension");
    u_hist_.push(u);
    y_hist_.push(std::vector<double>(y.begin(), y.end()));
  }

 private:
  fixedpoint::HistoryPolynomial g_;
  HistoryBuffer<double> u_hist_;
  HistoryBuffer<std::vector<double>> y_hist_;
};

/// Open-loop run of the recursion on a given input sequence.
inline std::vector<double> simulate_io(const IoRealization& io, const std::vector<std::vector<double>>& ys) {
  RealRecursion rec(io);
  std::vector<double> us;
  us.reserve(ys.size());
  for (const auto& y : ys) {
    const double u = rec.step(y);
    us.push_back(u);
    rec.feedback(u, y);
  }
  return us;
}

}  // namespace encctl::realization

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "encctl/error.hpp"
#include "encctl/polynomial.hpp"

namespace encctl::simloop {

/// Reference sequence w(t), added to the plant input.
struct Reference {
  enum class Kind { zero, constant, step, sine };
  Kind kind = Kind::zero;
  double value = 0.0;          // constant level / step height / sine amplitude
  std::uint64_t start = 0;     // step time
  double period = 1.0;         // sine period in steps
  double phase = 0.0;          // sine phase in radians

  double at(std::uint64_t t) const {
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::constant: return value;
      case Kind::step: return t >= start ? value : 0.0;
      case Kind::sine: return value * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
    }
    return 0.0;
  }

  void validate() const {
    if (!std::isfinite(value) || !std::isfinite(phase)) fail(ErrorCode::InvalidArgument, "reference must be finite");
    if (kind == Kind::sine && !(period > 0.0 && std::isfinite(period)))
      fail(ErrorCode::InvalidArgument, "sine period must be positive");
  }
};

/// x(t+1) = A x + B (u + w), y = C x.
struct LinearPlant {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::MatrixXd C;  // p x n
  Eigen::VectorXd x0;
};

/// x(t+1)[i] = f_i(x, u + w), y[k] = h_k(x); variables x[1..n] and u.
struct PolynomialPlant {
  std::vector<Polynomial<double>> f;
  std::vector<Polynomial<double>> h;
  Eigen::VectorXd x0;
};

struct PlantSpec {
  std::variant<LinearPlant, PolynomialPlant> model;

  int n() const {
    if (const auto* lp = std::get_if<LinearPlant>(&model)) return static_cast<int>(lp->A.rows());
    return static_cast<int>(std::get<PolynomialPlant>(model).f.size());
  }
  int p() const {
    if (const auto* lp = std::get_if<LinearPlant>(&model)) return static_cast<int>(lp->C.rows());
    return static_cast<int>(std::get<PolynomialPlant>(model).h.size());
  }

  Eigen::VectorXd initial_state() const {
    const Eigen::VectorXd& x0 = std::visit([](const auto& m) -> const Eigen::VectorXd& { return m.x0; }, model);
    return x0.size() == 0 ? Eigen::VectorXd::Zero(n()) : x0;
  }

  void validate() const {
    const int n_ = n();
    if (n_ < 1) fail(ErrorCode::InvalidArgument, "plant state dimension must be >= 1");
    if (p() < 1) fail(ErrorCode::InvalidArgument, "plant must have at least one output");
    if (const auto* lp = std::get_if<LinearPlant>(&model)) {
      if (lp->A.cols() != n_ || lp->B.size() != n_ || lp->C.cols() != n_)
        fail(ErrorCode::InvalidArgument, "plant matrices have inconsistent dimensions");
      if (!lp->A.allFinite() || !lp->B.allFinite() || !lp->C.allFinite() || !lp->x0.allFinite())
        fail(ErrorCode::InvalidArgument, "plant matrices must be finite");
    } else {
      const auto& pp = std::get<PolynomialPlant>(model);
      auto check = [&](const Polynomial<double>& q, const std::string& what) {
        for (const auto& t : q.terms) {
          if (!std::isfinite(t.coeff)) fail(ErrorCode::InvalidArgument, what + " has a non-finite coefficient");
          for (const auto& [v, k] : t.powers) {
            const bool ok = (v.kind == VarKind::x && v.index >= 1 && v.index <= n_) ||
                            (v.kind == VarKind::u && v.index == 0);
            if (!ok) fail(ErrorCode::InvalidArgument, what + ": " + to_string(v) + " is not a plant variable");
          }
        }
      };
      for (std::size_t i = 0; i < pp.f.size(); ++i) check(pp.f[i], "f_" + std::to_string(i + 1));
      for (std::size_t k = 0; k < pp.h.size(); ++k) {
        check(pp.h[k], "h_" + std::to_string(k + 1));
        for (const auto& v : pp.h[k].variables())
          if (v.kind == VarKind::u) fail(ErrorCode::InvalidArgument, "plant output must not depend on u");
      }
      if (!pp.x0.allFinite()) fail(ErrorCode::InvalidArgument, "plant x0 must be finite");
    }
    const auto& x0 = std::visit([](const auto& m) -> const Eigen::VectorXd& { return m.x0; }, model);
    if (x0.size() != 0 && x0.size() != n_) fail(ErrorCode::InvalidArgument, "plant x0 must have length n");
  }
};

/// Running plant with a divergence guard on the state infinity norm.
class PlantSim {
 public:
  PlantSim(const PlantSpec& spec, double guard) : spec_(&spec), x_(spec.initial_state()), guard_(guard) {
    spec.validate();
  }

  const Eigen::VectorXd& state() const { return x_; }

  std::vector<double> output() const {
    std::vector<double> y(static_cast<std::size_t>(spec_->p()));
    if (const auto* lp = std::get_if<LinearPlant>(&spec_->model)) {
      const Eigen::VectorXd v = lp->C * x_;
      for (Eigen::Index k = 0; k < v.size(); ++k) y[static_cast<std::size_t>(k)] = v(k);
    } else {
      const auto& pp = std::get<PolynomialPlant>(spec_->model);
      for (std::size_t k = 0; k < pp.h.size(); ++k) y[k] = eval(pp.h[k], 0.0);
    }
    return y;
  }

  /// Applies plant input `v` (control plus reference).
  void advance(double v) {
    if (const auto* lp = std::get_if<LinearPlant>(&spec_->model)) {
      x_ = lp->A * x_ + lp->B * v;
    } else {
      const auto& pp = std::get<PolynomialPlant>(spec_->model);
      Eigen::VectorXd next(x_.size());
      for (std::size_t i = 0; i < pp.f.size(); ++i) next(static_cast<Eigen::Index>(i)) = eval(pp.f[i], v);
      x_ = next;
    }
    const double norm = x_.size() ? x_.cwiseAbs().maxCoeff() : 0.0;
    if (!std::isfinite(norm) || norm > guard_)
      fail(ErrorCode::PlantDiverged, "plant state norm " + std::to_string(norm) + " exceeds the guard " +
                                         std::to_string(guard_) + " (1e3 * M); the loop is not stable");
  }

 private:
  double eval(const Polynomial<double>& q, double v) const {
    return evaluate(q, [&](const Variable& var) -> double {
      if (var.kind == VarKind::u) return v;
      return x_(var.index - 1);
    });
  }

  const PlantSpec* spec_;
  Eigen::VectorXd x_;
  double guard_;
};

}  // namespace encctl::simloop

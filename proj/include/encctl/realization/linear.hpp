// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Linear controllers x(t+1) = A x + B y, u = C x (+ D y): observability
// decomposition, observer canonical form, and input-output coefficients.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "encctl/error.hpp"
#include "encctl/fixedpoint.hpp"
#include "encctl/polynomial.hpp"
#include "encctl/realization/io.hpp"

namespace encctl::realization {

struct LinearController {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::RowVectorXd C;
  Eigen::VectorXd x0;
  Eigen::RowVectorXd D;  // empty: no direct feedthrough

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(B.cols()); }
  bool has_feedthrough() const { return D.size() > 0 && D.cwiseAbs().maxCoeff() > 0.0; }

  void validate() const {
    const auto n_ = A.rows();
    if (n_ < 1 || A.cols() != n_) fail(ErrorCode::InvalidArgument, "A must be square and non-empty");
    if (B.rows() != n_ || B.cols() < 1) fail(ErrorCode::InvalidArgument, "B must have n rows and p >= 1 columns");
    if (C.size() != n_) fail(ErrorCode::InvalidArgument, "C must be a row of length n");
    if (x0.size() != 0 && x0.size() != n_) fail(ErrorCode::InvalidArgument, "x0 must have length n");
    if (D.size() != 0 && D.size() != B.cols()) fail(ErrorCode::InvalidArgument, "D must be a row of length p");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !x0.allFinite() || !D.allFinite())
      fail(ErrorCode::InvalidArgument, "controller matrices must be finite");
  }

  Eigen::VectorXd initial_state() const { return x0.size() == 0 ? Eigen::VectorXd::Zero(A.rows()) : x0; }
};

/// [z; z'] = T x with z in observer canonical form:
///   Ao = [0 ... 0 -a_n'; 1 0 ... -a_{n'-1}; ...; 0 ... 1 -a_1], Co = [0 ... 0 1],
/// where z^n' + a_1 z^{n'-1} + ... + a_n' is the characteristic polynomial of
/// the observable part.
struct DecompositionResult {
  int n = 0;
  int n_obs = 0;
  Eigen::MatrixXd T;  // n x n; first n_obs rows map x to z
  Eigen::MatrixXd Ao;
  Eigen::MatrixXd Bo;
  Eigen::RowVectorXd Co;
  Eigen::RowVectorXd D;
  Eigen::VectorXd char_poly;  // a_1 .. a_n'
  Eigen::VectorXd z0;
  double condition_number = 0.0;  // of T
  std::vector<double> singular_values;  // of the observability matrix
  std::vector<std::string> warnings;

  Eigen::MatrixXd observable_rows() const { return T.topRows(n_obs); }
  int dropped_modes() const { return n - n_obs; }
};

inline constexpr double kRankTolerance = 1e-9;

inline Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C, int rows) {
  Eigen::MatrixXd O(rows, A.cols());
  Eigen::RowVectorXd row = C;
  for (int k = 0; k < rows; ++k) {
    O.row(k) = row;
    row = row * A;
  }
  return O;
}

/// C A^k B for k = 0..count-1.
inline std::vector<Eigen::RowVectorXd> markov_parameters(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                         const Eigen::RowVectorXd& C, int count) {
  std::vector<Eigen::RowVectorXd> out;
  Eigen::RowVectorXd row = C;
  for (int k = 0; k < count; ++k) {
    out.emplace_back(row * B);
    row = row * A;
  }
  return out;
}

inline DecompositionResult observable_decomposition(const LinearController& ctrl) {
  ctrl.validate();
  const int n = ctrl.n();
  DecompositionResult res;
  res.n = n;

  const Eigen::MatrixXd O = observability_matrix(ctrl.A, ctrl.C, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(O);
  const Eigen::VectorXd sv = svd.singularValues();
  res.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (!(smax > 0.0)) fail(ErrorCode::NoObservableDynamics, "the observability matrix is zero; u does not depend on x");
  const double tau = kRankTolerance * smax;
  int n_obs = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > tau) ++n_obs;
    if (sv(i) > tau / 10.0 && sv(i) < tau * 10.0)
      res.warnings.push_back("singular value " + std::to_string(sv(i)) +
                             " is within a factor 10 of the rank tolerance; observable dimension is ambiguous");
  }
  res.n_obs = n_obs;

  // For a single output the rows C, CA, ..., CA^{n'-1} span the row space.
  const Eigen::MatrixXd W = O.topRows(n_obs);
  const Eigen::RowVectorXd next = observability_matrix(ctrl.A, ctrl.C, n_obs + 1).row(n_obs);
  const Eigen::VectorXd c = W.transpose().colPivHouseholderQr().solve(next.transpose());

  res.char_poly.resize(n_obs);
  for (int i = 1; i <= n_obs; ++i) res.char_poly(i - 1) = -c(n_obs - i);

  res.Ao = Eigen::MatrixXd::Zero(n_obs, n_obs);
  for (int i = 1; i < n_obs; ++i) res.Ao(i, i - 1) = 1.0;
  for (int i = 0; i < n_obs; ++i) res.Ao(i, n_obs - 1) = -res.char_poly(n_obs - i - 1);
  res.Co = Eigen::RowVectorXd::Zero(n_obs);
  res.Co(n_obs - 1) = 1.0;

  const Eigen::MatrixXd Oc = observability_matrix(res.Ao, res.Co, n_obs);
  const Eigen::MatrixXd To = Oc.fullPivLu().solve(W);
  res.Bo = To * ctrl.B;

  res.T.resize(n, n);
  res.T.topRows(n_obs) = To;
  if (n_obs < n) {
    Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(W, Eigen::ComputeFullV);
    res.T.bottomRows(n - n_obs) = wsvd.matrixV().rightCols(n - n_obs).transpose();
  }
  const Eigen::VectorXd tsv = Eigen::JacobiSVD<Eigen::MatrixXd>(res.T).singularValues();
  res.condition_number = tsv(0) / tsv(tsv.size() - 1);

  res.D = ctrl.has_feedthrough() ? ctrl.D : Eigen::RowVectorXd();
  res.z0 = To * ctrl.initial_state();
  return res;
}

/// Coefficients of u(t) = sum_i alpha_i u(t-i) + beta_i^T y(t-i) (+ D y(t))
/// read off the canonical form: alpha_i = -a_i, beta_i = row n'-i+1 of Bo.
/// The returned history is all-zero; see derive_initial_history.
inline IoRealization io_coefficients(const DecompositionResult& dec) {
  const int m = dec.n_obs;
  const int p = static_cast<int>(dec.Bo.cols());
  const bool ft = dec.D.size() > 0;
  fixedpoint::HistoryPolynomial g;
  g.m = m;
  g.p = p;
  g.feedthrough = ft;
  for (int i = 1; i <= m; ++i) {
    const double alpha = -dec.char_poly(i - 1);
    g.poly.terms.push_back({alpha, {{Variable::u(i), 1}}});
    for (int k = 1; k <= p; ++k) {
      double beta = dec.Bo(m - i, k - 1);
      if (ft) beta -= alpha * dec.D(k - 1);
      g.poly.terms.push_back({beta, {{Variable::y(i, k), 1}}});
    }
  }
  if (ft)
    for (int k = 1; k <= p; ++k) g.poly.terms.push_back({dec.D(k - 1), {{Variable::y(0, k), 1}}});
  g.poly = normalized(g.poly);
  return IoRealization::zero_history(std::move(g));
}

/// Open-loop state-space run: returns u(t) for the given inputs.
inline std::vector<double> simulate_state_space(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                const Eigen::RowVectorXd& C, const Eigen::RowVectorXd& D,
                                                Eigen::VectorXd x, const std::vector<std::vector<double>>& ys) {
  std::vector<double> us;
  us.reserve(ys.size());
  for (const auto& yv : ys) {
    const Eigen::Map<const Eigen::VectorXd> y(yv.data(), static_cast<Eigen::Index>(yv.size()));
    double u = (C * x).value();
    if (D.size() > 0) u += (D * y).value();
    us.push_back(u);
    x = A * x + B * y;
  }
  return us;
}

inline std::vector<double> simulate_state_space(const LinearController& ctrl,
                                                const std::vector<std::vector<double>>& ys) {
  return simulate_state_space(ctrl.A, ctrl.B, ctrl.C, ctrl.D, ctrl.initial_state(), ys);
}

/// Reduced-order run on the observable part only.
inline std::vector<double> simulate_reduced(const DecompositionResult& dec, const std::vector<std::vector<double>>& ys) {
  return simulate_state_space(dec.Ao, dec.Bo, dec.Co, dec.D, dec.z0, ys);
}

}  // namespace encctl::realization

// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Random linear controllers shared by the realization tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "encctl/realization/linear.hpp"

namespace encctl::testing {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = d(rng);
  return m;
}

inline double spectral_radius(const Eigen::MatrixXd& A) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Gaussian matrix rescaled to a spectral radius drawn from [0.1, rho_max].
inline Eigen::MatrixXd random_stable(std::mt19937_64& rng, Eigen::Index n, double rho_max = 0.95) {
  std::uniform_real_distribution<double> target(0.1, rho_max);
  Eigen::MatrixXd A = gaussian(rng, n, n);
  const double rho = spectral_radius(A);
  if (rho > 0.0) A *= target(rng) / rho;
  return A;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, n, n));
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// sigma_min / sigma_max of the observability matrix restricted to `rows`.
inline double observability_ratio(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C, int rows) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(realization::observability_matrix(A, C, rows))
                                 .singularValues();
  return sv(sv.size() - 1) / sv(0);
}

// Random systems whose observability matrix is nearly singular produce
// companion forms with huge coefficients; those are realizations of a
// different problem (ill-conditioning), so they are redrawn.
inline constexpr double kMinObservabilityRatio = 1e-4;

struct RandomController {
  realization::LinearController ctrl;
  int n_obs = 0;
};

/// Observable controller with n <= 5, p <= 3, spectral radius <= 0.95.
inline RandomController random_observable(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_n(1, 5), dim_p(1, 3);
  const int n = dim_n(rng), p = dim_p(rng);
  for (;;) {
    realization::LinearController c;
    c.A = random_stable(rng, n);
    c.B = gaussian(rng, n, p);
    c.C = gaussian(rng, 1, n);
    c.x0 = gaussian(rng, n, 1);
    if (observability_ratio(c.A, c.C, n) >= kMinObservabilityRatio) return {c, n};
  }
}

/// Controller with at least one unobservable mode, in Kalman form
///   A = [A11 0; A21 A22], C = [C1 0]
/// hidden behind a random orthogonal change of coordinates.
inline RandomController random_with_unobservable(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_n(2, 5), dim_p(1, 3);
  const int n = dim_n(rng), p = dim_p(rng);
  const int n_obs = std::uniform_int_distribution<int>(1, n - 1)(rng);
  const int n_un = n - n_obs;
  for (;;) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    A.topLeftCorner(n_obs, n_obs) = random_stable(rng, n_obs);
    A.bottomLeftCorner(n_un, n_obs) = gaussian(rng, n_un, n_obs);
    A.bottomRightCorner(n_un, n_un) = random_stable(rng, n_un);
    Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
    C.head(n_obs) = gaussian(rng, 1, n_obs);
    if (observability_ratio(A.topLeftCorner(n_obs, n_obs), C.head(n_obs), n_obs) < kMinObservabilityRatio) continue;
    const Eigen::MatrixXd S = random_orthogonal(rng, n);
    realization::LinearController c;
    c.A = S * A * S.transpose();
    c.B = gaussian(rng, n, p);
    c.C = C * S.transpose();
    c.x0 = gaussian(rng, n, 1);
    if (spectral_radius(c.A) > 0.95) continue;
    return {c, n_obs};
  }
}

inline std::vector<std::vector<double>> random_inputs(std::mt19937_64& rng, int p, int steps) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<std::vector<double>> ys(static_cast<std::size_t>(steps), std::vector<double>(static_cast<std::size_t>(p)));
  for (auto& y : ys)
    for (auto& v : y) v = d(rng);
  return ys;
}

/// Oracle: x(t+1) = A x(t) + B y(t), u(t) = C x(t) + D y(t), written out
/// without any library helper.
inline std::vector<double> direct_simulation(const realization::LinearController& c,
                                             const std::vector<std::vector<double>>& ys) {
  Eigen::VectorXd x = c.x0.size() ? c.x0 : Eigen::VectorXd::Zero(c.A.rows());
  std::vector<double> us;
  for (const auto& yv : ys) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(yv.size()));
    for (std::size_t k = 0; k < yv.size(); ++k) y(static_cast<Eigen::Index>(k)) = yv[k];
    double u = c.C.dot(x);
    if (c.D.size()) u += c.D.dot(y);
    us.push_back(u);
    x = c.A * x + c.B * y;
  }
  return us;
}

/// Oracle: C A^k B by repeated multiplication from the left.
inline Eigen::RowVectorXd markov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::RowVectorXd& C,
                                 int k) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) P = A * P;
  return C * P * B;
}

inline double max_markov_error(const realization::LinearController& c, const realization::DecompositionResult& dec) {
  double worst = 0.0;
  for (int k = 0; k <= 2 * c.n(); ++k)
    worst = std::max(worst, (markov(c.A, c.B, c.C, k) - markov(dec.Ao, dec.Bo, dec.Co, k)).cwiseAbs().maxCoeff());
  return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

}  // namespace encctl::testing

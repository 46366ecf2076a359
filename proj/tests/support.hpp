// SPDX-License-Identifier: Apache-2.0
//
// Oracles and reference solvers shared by the test binaries. Everything here
// is written independently of the library code it is used to check.

#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "lipal/problem.hpp"

namespace lipal::testing {

inline Vector gaussian(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

inline Eigen::MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = normal(rng);
  return M;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// f(x) = 1/2 x^T Q x + q^T x + sum cos(x_i)
/// F(x) = A x + 1/2 (B x) .* (B x) - b
/// The dense Jacobian A + diag(Bx) B is available for reference solves.
class DenseOracle final : public ProblemOracle {
 public:
  DenseOracle(Eigen::MatrixXd Q, Vector q, Eigen::MatrixXd A, Eigen::MatrixXd B, Vector b,
              ProxKind g = ZeroReg{})
      : Q_(std::move(Q)), q_(std::move(q)), A_(std::move(A)), B_(std::move(B)), b_(std::move(b)),
        g_(g) {}

  static DenseOracle random(Index n, Index m, std::mt19937_64& rng, ProxKind g = ZeroReg{}) {
    Eigen::MatrixXd R = gaussian(n, n, rng);
    return DenseOracle(0.5 * (R + R.transpose()), gaussian(n, rng), gaussian(m, n, rng),
                       0.3 * gaussian(m, n, rng), gaussian(m, rng), g);
  }

  Index dim_primal() const override { return q_.size(); }
  Index dim_constraints() const override { return b_.size(); }
  double smooth_value(const Vector& x) const override {
    return 0.5 * x.dot(Q_ * x) + q_.dot(x) + x.array().cos().sum();
  }
  Vector smooth_grad(const Vector& x) const override {
    return Q_ * x + q_ - Vector(x.array().sin());
  }
  Vector constraints(const Vector& x) const override {
    const Vector bx = B_ * x;
    return A_ * x + 0.5 * Vector(bx.array().square()) - b_;
  }
  Vector jac_apply(const Vector& x, const Vector& d) const override { return jacobian(x) * d; }
  Vector jac_transpose_apply(const Vector& x, const Vector& v) const override {
    return jacobian(x).transpose() * v;
  }
  ProxKind regularizer() const override { return g_; }

  Eigen::MatrixXd jacobian(const Vector& x) const {
    return A_ + (B_ * x).asDiagonal() * B_;
  }

 private:
  Eigen::MatrixXd Q_;
  Vector q_;
  Eigen::MatrixXd A_, B_;
  Vector b_;
  ProxKind g_;
};

/// F(x) = M x, but the transpose product applies M instead of M^T.
class WrongAdjointOracle final : public ProblemOracle {
 public:
  explicit WrongAdjointOracle(Eigen::MatrixXd M) : M_(std::move(M)) {}
  Index dim_primal() const override { return M_.cols(); }
  Index dim_constraints() const override { return M_.rows(); }
  double smooth_value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
  Vector smooth_grad(const Vector& x) const override { return x; }
  Vector constraints(const Vector& x) const override { return M_ * x; }
  Vector jac_apply(const Vector&, const Vector& d) const override { return M_ * d; }
  Vector jac_transpose_apply(const Vector&, const Vector& v) const override { return M_ * v; }

 private:
  Eigen::MatrixXd M_;
};

/// Exact minimizer of the g = 0 subproblem from its normal equations
///   (beta I + rho J^T J)(x - x_k) = -(grad f + J^T (y_tau + rho F(x_k))).
inline Vector normal_equation_step(const Eigen::MatrixXd& J, const Vector& grad_f,
                                   const Vector& F_k, const Vector& x_k, const Vector& y_tau,
                                   double rho, double beta) {
  const Index n = x_k.size();
  const Eigen::MatrixXd H =
      beta * Eigen::MatrixXd::Identity(n, n) + rho * J.transpose() * J;
  const Vector rhs = -(grad_f + J.transpose() * (y_tau + rho * F_k));
  return x_k + H.ldlt().solve(rhs);
}

struct GridResult {
  Vector point;
  /// The minimizer sits on a window face that is not also a face of the
  /// box [0, radius]^n, so the window may have cut off the optimum.
  bool on_window_edge = false;
};

/// Nearest point of {x >= 0, ||x|| <= radius} to u by exhaustive search over
/// the grid step * Z^n, restricted to the box [0, radius]^n intersected with
/// the window center +- halfwidth (halfwidth <= 0 searches the whole box).
/// The squared distance is convex, so a minimizer strictly inside the window
/// is also the minimizer over the whole set up to grid resolution.
inline GridResult grid_project_nonneg_ball(const Vector& u, double radius, double step,
                                           const Vector& center = {}, double halfwidth = 0.0) {
  const Index n = u.size();
  std::vector<long> lo(n), hi(n), box_hi(n);
  for (Index i = 0; i < n; ++i) {
    box_hi[i] = static_cast<long>(std::floor(radius / step + 1e-9));
    lo[i] = 0;
    hi[i] = box_hi[i];
    if (halfwidth > 0.0) {
      lo[i] = std::max(0L, static_cast<long>(std::floor((center[i] - halfwidth) / step)));
      hi[i] = std::min(box_hi[i], static_cast<long>(std::ceil((center[i] + halfwidth) / step)));
    }
  }
  GridResult out;
  out.point = Vector::Zero(n);
  double best_d = (u - out.point).squaredNorm();
  std::vector<long> best_idx(n, 0), idx = lo;
  Vector z(n);
  while (true) {
    for (Index i = 0; i < n; ++i) z[i] = static_cast<double>(idx[i]) * step;
    if (z.squaredNorm() <= radius * radius) {
      const double d = (u - z).squaredNorm();
      if (d < best_d) {
        best_d = d;
        out.point = z;
        best_idx = idx;
      }
    }
    Index i = 0;
    while (i < n && ++idx[i] > hi[i]) {
      idx[i] = lo[i];
      ++i;
    }
    if (i == n) break;
  }
  for (Index i = 0; i < n; ++i) {
    const bool at_lo = best_idx[i] == lo[i] && lo[i] > 0;
    const bool at_hi = best_idx[i] == hi[i] && hi[i] < box_hi[i];
    if (at_lo || at_hi) out.on_window_edge = true;
  }
  return out;
}

}  // namespace lipal::testing

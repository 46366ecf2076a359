// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Core>

#include "lipal/errors.hpp"
#include "lipal/prox.hpp"

namespace lipal {

/// Evaluation contract for
///
///     min_x  f(x) + g(x)   subject to   F(x) = 0,
///
/// with f: R^n -> R and F: R^n -> R^m smooth and g proper, lsc, convex with a
/// cheap proximal map. Jacobians of F are exposed only through products.
///
/// Implementations must be pure: every method is const and may be called
/// concurrently from independent solver runs.
class ProblemOracle {
 public:
  virtual ~ProblemOracle() = default;

  virtual Index dim_primal() const = 0;
  virtual Index dim_constraints() const = 0;

  virtual double smooth_value(const Vector& x) const = 0;
  virtual Vector smooth_grad(const Vector& x) const = 0;
  virtual Vector constraints(const Vector& x) const = 0;
  /// J_F(x) d
  virtual Vector jac_apply(const Vector& x, const Vector& d) const = 0;
  /// J_F(x)^T v
  virtual Vector jac_transpose_apply(const Vector& x, const Vector& v) const = 0;

  /// The nonsmooth term. prox_g, g_value and the subgradient helpers below
  /// all derive from it unless overridden.
  virtual ProxKind regularizer() const { return ZeroReg{}; }

  virtual ProxResult prox_g(const Vector& u, double t) const { return prox(regularizer(), u, t); }
  virtual double g_value(const Vector& x) const { return lipal::g_value(regularizer(), x); }
};

namespace detail {

inline void require_dim(const Vector& v, Index n, const char* what) {
  if (v.size() != n)
    throw InvalidInput(std::string(what) + ": expected dimension " + std::to_string(n) +
                       ", got " + std::to_string(v.size()));
}

inline const Vector& require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NumericalFailure(std::string(what) + " returned a non-finite value");
  return v;
}

inline double require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalFailure(std::string(what) + " returned a non-finite value");
  return v;
}

}  // namespace detail

// Checked evaluation: every value entering solver state passes through these,
// so NaN/Inf from an oracle surfaces as NumericalFailure at the boundary.
namespace eval {

inline double f(const ProblemOracle& o, const Vector& x) {
  return detail::require_finite(o.smooth_value(x), "smooth_value");
}
inline Vector grad(const ProblemOracle& o, const Vector& x) {
  Vector g = o.smooth_grad(x);
  detail::require_dim(g, o.dim_primal(), "smooth_grad");
  detail::require_finite(g, "smooth_grad");
  return g;
}
inline Vector F(const ProblemOracle& o, const Vector& x) {
  Vector c = o.constraints(x);
  detail::require_dim(c, o.dim_constraints(), "constraints");
  detail::require_finite(c, "constraints");
  return c;
}
inline Vector J(const ProblemOracle& o, const Vector& x, const Vector& d) {
  Vector r = o.jac_apply(x, d);
  detail::require_dim(r, o.dim_constraints(), "jac_apply");
  detail::require_finite(r, "jac_apply");
  return r;
}
inline Vector Jt(const ProblemOracle& o, const Vector& x, const Vector& v) {
  Vector r = o.jac_transpose_apply(x, v);
  detail::require_dim(r, o.dim_primal(), "jac_transpose_apply");
  detail::require_finite(r, "jac_transpose_apply");
  return r;
}
inline ProxResult prox(const ProblemOracle& o, const Vector& u, double t) {
  ProxResult r = o.prox_g(u, t);
  detail::require_finite(r.point, "prox_g");
  detail::require_finite(r.certificate, "prox_g certificate");
  return r;
}
inline double g(const ProblemOracle& o, const Vector& x) {
  const double v = o.g_value(x);
  if (std::isnan(v)) throw NumericalFailure("g_value returned NaN");
  return v;
}

}  // namespace eval

/// Residuals of the epsilon-KKT test: x is epsilon-first-order optimal when
/// both fields are <= epsilon.
struct KktResidual {
  /// ||grad f(x) + J_F(x)^T y + certificate||, an upper bound on
  /// dist(-grad f(x) - J_F(x)^T y, subdiff g(x)); exact when the certificate
  /// is the nearest subgradient.
  double stationarity = 0.0;
  /// ||F(x)||
  double feasibility = 0.0;
};

/// The certificate must be a subgradient of g at x, normally the one
/// returned by the prox call that produced x.
inline KktResidual kkt_residual(const ProblemOracle& oracle, const Vector& x, const Vector& y,
                                const Vector& certificate) {
  detail::require_dim(x, oracle.dim_primal(), "kkt_residual x");
  detail::require_dim(y, oracle.dim_constraints(), "kkt_residual y");
  detail::require_dim(certificate, oracle.dim_primal(), "kkt_residual certificate");
  detail::require_finite(certificate, "kkt_residual certificate");
  const Vector r = eval::grad(oracle, x) + eval::Jt(oracle, x, y) + certificate;
  return {r.norm(), eval::F(oracle, x).norm()};
}

/// Same residual with the certificate replaced by the subgradient of g at x
/// closest to -(grad f + J^T y).
inline KktResidual kkt_residual_exact(const ProblemOracle& oracle, const Vector& x,
                                      const Vector& y) {
  detail::require_dim(x, oracle.dim_primal(), "kkt_residual x");
  detail::require_dim(y, oracle.dim_constraints(), "kkt_residual y");
  const Vector w = -(eval::grad(oracle, x) + eval::Jt(oracle, x, y));
  const Vector cert = nearest_subgradient(oracle.regularizer(), x, w);
  return {(cert - w).norm(), eval::F(oracle, x).norm()};
}

/// Largest |<J d, v> - <d, J^T v>| / (1 + ||d|| ||v||) over `trials` random
/// Gaussian pairs (d, v).
inline double assert_adjoint(const ProblemOracle& oracle, const Vector& x, int trials,
                             std::uint64_t seed = 0x5eed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Index n = oracle.dim_primal();
  const Index m = oracle.dim_constraints();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector d(n), v(m);
    for (Index i = 0; i < n; ++i) d[i] = normal(rng);
    for (Index i = 0; i < m; ++i) v[i] = normal(rng);
    const double lhs = eval::J(oracle, x, d).dot(v);
    const double rhs = d.dot(eval::Jt(oracle, x, v));
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + d.norm() * v.norm()));
  }
  return worst;
}

/// Relative error between smooth_grad and a central finite difference of
/// smooth_value, measured along a random unit direction:
/// |<grad, u> - (f(x+hu) - f(x-hu)) / 2h| / max(1, |<grad, u>|).
inline double gradient_check(const ProblemOracle& oracle, const Vector& x, std::mt19937_64& rng,
                             double h = 1e-6) {
  std::normal_distribution<double> normal;
  Vector u(oracle.dim_primal());
  for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
  u.normalize();
  const double analytic = eval::grad(oracle, x).dot(u);
  const double fd = (eval::f(oracle, x + h * u) - eval::f(oracle, x - h * u)) / (2.0 * h);
  return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

/// Relative error between jac_apply and a central finite difference of
/// constraints along a random unit direction.
inline double jacobian_check(const ProblemOracle& oracle, const Vector& x, std::mt19937_64& rng,
                             double h = 1e-6) {
  std::normal_distribution<double> normal;
  Vector u(oracle.dim_primal());
  for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
  u.normalize();
  const Vector analytic = eval::J(oracle, x, u);
  const Vector fd = (eval::F(oracle, x + h * u) - eval::F(oracle, x - h * u)) / (2.0 * h);
  return (analytic - fd).norm() / std::max(1.0, analytic.norm());
}

}  // namespace lipal

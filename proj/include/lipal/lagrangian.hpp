// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "lipal/problem.hpp"

namespace lipal {

/// y_tau = tau y0 + (1 - tau) y
inline Vector perturbed_dual_blend(const Vector& y0, const Vector& y, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw InvalidInput("perturbed_dual_blend: tau must lie in [0, 1]");
  detail::require_dim(y, y0.size(), "perturbed_dual_blend");
  return tau * y0 + (1.0 - tau) * y;
}

/// y+ = y_tau + rho F(x+)
inline Vector dual_update(const Vector& y_tau, double rho, const Vector& F_next) {
  detail::require_dim(F_next, y_tau.size(), "dual_update");
  return y_tau + rho * F_next;
}

/// f + g + <y_tau, F> + (rho/2) ||F||^2 from cached pieces.
inline double perturbed_al_from_parts(double f, double g, const Vector& F, const Vector& y_tau,
                                      double rho) {
  return f + g + y_tau.dot(F) + 0.5 * rho * F.squaredNorm();
}

/// Perturbed augmented Lagrangian
///   f(x) + g(x) + <tau y0 + (1 - tau) y, F(x)> + (rho/2) ||F(x)||^2.
inline double perturbed_al_value(const ProblemOracle& oracle, const Vector& x, const Vector& y,
                                 const Vector& y0, double tau, double rho) {
  const double g = eval::g(oracle, x);
  if (!std::isfinite(g)) throw DomainError("perturbed_al_value: x is outside dom g");
  return perturbed_al_from_parts(eval::f(oracle, x), g, eval::F(oracle, x),
                                 perturbed_dual_blend(y0, y, tau), rho);
}

/// Lyapunov function
///   L(x, y; y0) - tau (1 - tau) / (2 rho) ||y - y0||^2
///               + 2 (1 - tau)^2 / (tau rho) ||y - y_prev||^2
/// given al = L(x, y; y0).
inline double lyapunov_from_parts(double al, const Vector& y, const Vector& y_prev,
                                  const Vector& y0, double tau, double rho) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("lyapunov: tau must lie in (0, 1]");
  if (!(rho > 0.0)) throw InvalidInput("lyapunov: rho must be > 0");
  return al - tau * (1.0 - tau) / (2.0 * rho) * (y - y0).squaredNorm() +
         2.0 * (1.0 - tau) * (1.0 - tau) / (tau * rho) * (y - y_prev).squaredNorm();
}

inline double lyapunov_value(const ProblemOracle& oracle, const Vector& x, const Vector& y,
                             const Vector& y_prev, const Vector& y0, double tau, double rho) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("lyapunov_value: tau must lie in (0, 1]");
  return lyapunov_from_parts(perturbed_al_value(oracle, x, y, y0, tau, rho), y, y_prev, y0, tau,
                             rho);
}

}  // namespace lipal

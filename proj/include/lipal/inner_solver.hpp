// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <random>

#include "lipal/problem.hpp"

namespace lipal {

/// The strongly convex primal subproblem built at an anchor x_k:
///
///   Q_k(x) = l_f(x; x_k) + g(x) + <y_tau, l_F(x; x_k)>
///            + (rho/2) ||l_F(x; x_k)||^2 + (beta/2) ||x - x_k||^2
///
/// with l_f, l_F the first-order models of f and F at x_k. The cached values
/// must be the oracle's values at the anchor.
struct SubproblemSpec {
  const ProblemOracle* oracle = nullptr;
  Vector anchor;
  Vector y_tau;
  double rho = 0.0;
  double beta = 1.0;
  double f_anchor = 0.0;
  Vector grad_anchor;
  Vector F_anchor;
  /// Cached estimate of lambda_max(J^T J) at the anchor; negative means
  /// "not computed yet".
  double jtj_norm = -1.0;

  static SubproblemSpec at(const ProblemOracle& oracle, const Vector& x, const Vector& y_tau,
                           double rho, double beta) {
    SubproblemSpec s;
    s.oracle = &oracle;
    s.anchor = x;
    s.y_tau = y_tau;
    s.rho = rho;
    s.beta = beta;
    s.f_anchor = eval::f(oracle, x);
    s.grad_anchor = eval::grad(oracle, x);
    s.F_anchor = eval::F(oracle, x);
    return s;
  }
};

struct InnerStats {
  int iterations = 0;
  /// ||L (z - x+)|| at the last accepted step.
  double grad_map_norm = 0.0;
  /// ||s|| with s = grad of the smooth part at x+ plus the prox certificate,
  /// an element of the subdifferential of Q_k at x+.
  double subgrad_norm = 0.0;
  /// Step constant in force at exit (power-iteration estimate, possibly
  /// doubled by backtracking).
  double lipschitz = 0.0;
  double value = 0.0;
  /// ||s|| / ||x+ - x_k||, the inexactness constant this solve achieved.
  double implied_alpha = 0.0;
  bool converged = false;
  int restarts = 0;
};

struct SubproblemResult {
  Vector x_plus;
  Vector certificate;
  InnerStats stats;
};

namespace detail {

// A point of the subproblem with everything needed to combine it linearly:
// the smooth part is quadratic, so J d and the gradient are affine in x.
struct QuadPoint {
  Vector x;
  Vector jd;  // J_F(x_k) (x - x_k)
  Vector grad;
  double smooth = 0.0;
};

inline double smooth_value_from(const SubproblemSpec& s, const Vector& x, const Vector& jd) {
  const Vector d = x - s.anchor;
  const Vector lF = s.F_anchor + jd;
  return s.f_anchor + s.grad_anchor.dot(d) + s.y_tau.dot(lF) + 0.5 * s.rho * lF.squaredNorm() +
         0.5 * s.beta * d.squaredNorm();
}

inline QuadPoint evaluate(const SubproblemSpec& s, const Vector& x) {
  const ProblemOracle& o = *s.oracle;
  QuadPoint p;
  p.x = x;
  const Vector d = x - s.anchor;
  p.jd = eval::J(o, s.anchor, d);
  p.grad = s.grad_anchor + eval::Jt(o, s.anchor, s.y_tau + s.rho * (s.F_anchor + p.jd)) +
           s.beta * d;
  p.smooth = smooth_value_from(s, x, p.jd);
  return p;
}

inline QuadPoint extrapolate(const SubproblemSpec& s, const QuadPoint& cur, const QuadPoint& prev,
                             double momentum) {
  QuadPoint z;
  z.x = cur.x + momentum * (cur.x - prev.x);
  z.jd = cur.jd + momentum * (cur.jd - prev.jd);
  z.grad = cur.grad + momentum * (cur.grad - prev.grad);
  z.smooth = smooth_value_from(s, z.x, z.jd);
  return z;
}

}  // namespace detail

/// Gradient of the smooth part of Q_k:
/// grad f(x_k) + J(x_k)^T (y_tau + rho l_F(x; x_k)) + beta (x - x_k).
inline Vector smooth_part_grad(const SubproblemSpec& spec, const Vector& x) {
  detail::require_dim(x, spec.oracle->dim_primal(), "smooth_part_grad");
  return detail::evaluate(spec, x).grad;
}

/// Q_k(x), including g.
inline double subproblem_value(const SubproblemSpec& spec, const Vector& x) {
  const Vector jd = eval::J(*spec.oracle, spec.anchor, x - spec.anchor);
  return detail::smooth_value_from(spec, x, jd) + eval::g(*spec.oracle, x);
}

/// lambda_max(J^T J) at x by 30 power-iteration steps from a fixed start.
/// The Rayleigh quotient never overshoots, so this underestimates at worst.
inline double jtj_max_eigenvalue(const ProblemOracle& oracle, const Vector& x, int steps = 30) {
  const Index n = oracle.dim_primal();
  if (n == 0 || oracle.dim_constraints() == 0) return 0.0;
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < steps; ++it) {
    const Vector w = eval::Jt(oracle, x, eval::J(oracle, x, v));
    lambda = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
  }
  return lambda;
}

/// Step constant for the accelerated solver: beta + rho * lambda_max(J^T J).
inline double estimate_lipschitz(SubproblemSpec& spec) {
  if (spec.rho == 0.0) return spec.beta;
  if (spec.jtj_norm < 0.0) spec.jtj_norm = jtj_max_eigenvalue(*spec.oracle, spec.anchor);
  return spec.beta + spec.rho * spec.jtj_norm;
}

/// Accelerated proximal gradient on Q_k with backtracking on the step
/// constant and function-value restarts.
///
/// Every accepted iterate is a prox output, so its certificate is always at
/// hand; iterates never increase Q_k, hence Q_k(x+) <= Q_k(warm_start).
/// Stops once both the gradient mapping and the subgradient s of Q_k at the
/// iterate are below eps_sub, or after max_inner steps (flagged not
/// converged, best iterate returned).
inline SubproblemResult solve_subproblem(SubproblemSpec& spec, const Vector& warm_start,
                                         double eps_sub, int max_inner) {
  const ProblemOracle& o = *spec.oracle;
  detail::require_dim(warm_start, o.dim_primal(), "solve_subproblem warm start");
  if (!(spec.beta > 0.0)) throw InvalidInput("solve_subproblem: beta must be > 0");

  double L = estimate_lipschitz(spec);
  InnerStats stats;

  detail::QuadPoint cur = detail::evaluate(spec, warm_start);
  double cur_value = cur.smooth + eval::g(o, cur.x);
  if (!std::isfinite(cur_value)) throw DomainError("solve_subproblem: warm start outside dom g");
  detail::QuadPoint prev = cur;
  Vector cur_cert = Vector::Zero(o.dim_primal());
  double t = 1.0;

  // One backtracked prox-gradient step from z. Returns the new point, its
  // certificate and the gradient-mapping norm.
  auto step_from = [&](const detail::QuadPoint& z, Vector& cert, double& gmap) {
    for (int doubling = 0; doubling <= 60; ++doubling) {
      const Vector u = z.x - z.grad / L;
      ProxResult pr = eval::prox(o, u, 1.0 / L);
      detail::QuadPoint p = detail::evaluate(spec, pr.point);
      const Vector step = p.x - z.x;
      const double model = z.smooth + z.grad.dot(step) + 0.5 * L * step.squaredNorm();
      if (p.smooth <= model + 1e-12 * (1.0 + std::abs(model))) {
        cert = std::move(pr.certificate);
        gmap = L * step.norm();
        return p;
      }
      L *= 2.0;
    }
    throw NumericalFailure("solve_subproblem: step-size backtracking did not terminate");
  };

  for (int it = 0; it < max_inner; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    detail::QuadPoint z = momentum > 0.0 ? detail::extrapolate(spec, cur, prev, momentum) : cur;

    Vector cert;
    double gmap = 0.0;
    detail::QuadPoint next = step_from(z, cert, gmap);
    double next_value = next.smooth + eval::g(o, next.x);
    t = t_next;

    if (!(next_value <= cur_value + 1e-14 * (1.0 + std::abs(cur_value)))) {
      // Momentum overshot: restart from the current iterate with a plain
      // prox-gradient step, which cannot increase Q_k.
      ++stats.restarts;
      t = 1.0;
      next = step_from(cur, cert, gmap);
      next_value = next.smooth + eval::g(o, next.x);
      if (next_value > cur_value && it > 0) {
        next = cur;
        next_value = cur_value;
        cert = cur_cert;
      }
    }

    prev = std::move(cur);
    cur = std::move(next);
    cur_value = next_value;
    cur_cert = std::move(cert);
    stats.iterations = it + 1;
    stats.grad_map_norm = gmap;
    stats.subgrad_norm = (cur.grad + cur_cert).norm();
    if (gmap <= eps_sub && stats.subgrad_norm <= eps_sub) {
      stats.converged = true;
      break;
    }
  }

  stats.lipschitz = L;
  stats.value = cur_value;
  const double dx = (cur.x - spec.anchor).norm();
  stats.implied_alpha = dx > 0.0 ? stats.subgrad_norm / dx : 0.0;
  return {std::move(cur.x), std::move(cur_cert), stats};
}

}  // namespace lipal

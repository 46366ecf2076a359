// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <variant>

#include <Eigen/Core>

#include "lipal/errors.hpp"

namespace lipal {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Regularizers g with closed-form proximal maps. Only convex g are shipped;
// a weakly convex g would need a curvature bound on top of this interface.

/// g = 0.
struct ZeroReg {};

/// Indicator of the box {lo <= x_i <= hi} (bounds may be infinite).
struct BoxIndicator {
  double lo = -kInf;
  double hi = kInf;
};

/// Indicator of {x >= 0, ||x|| <= radius}.
struct NonnegBallIndicator {
  double radius = 1.0;
};

/// g(x) = weight * ||x||_1.
struct L1Norm {
  double weight = 1.0;
};

using ProxKind = std::variant<ZeroReg, BoxIndicator, NonnegBallIndicator, L1Norm>;

/// p = prox_{t g}(u) together with the certificate (u - p) / t, which lies in
/// the subdifferential of g at p.
struct ProxResult {
  Vector point;
  Vector certificate;
};

inline ProxKind nonneg_orthant() { return BoxIndicator{0.0, kInf}; }

inline void validate(const ProxKind& kind) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, BoxIndicator>) {
          if (std::isnan(k.lo) || std::isnan(k.hi) || k.lo > k.hi)
            throw InvalidInput("box indicator requires lo <= hi");
        } else if constexpr (std::is_same_v<K, NonnegBallIndicator>) {
          if (!(k.radius > 0.0) || !std::isfinite(k.radius))
            throw InvalidInput("nonneg-ball indicator requires a finite radius > 0");
        } else if constexpr (std::is_same_v<K, L1Norm>) {
          if (!(k.weight >= 0.0) || !std::isfinite(k.weight))
            throw InvalidInput("l1 weight must be finite and >= 0");
        }
      },
      kind);
}

/// Euclidean projection onto {x >= 0, ||x|| <= radius}: clip to the orthant,
/// then rescale onto the ball if outside. The ball is centred at the apex of
/// the cone, so the two steps compose to the exact projection.
inline Vector project_nonneg_ball(const Vector& u, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw InvalidInput("project_nonneg_ball: radius must be finite and > 0");
  Vector p = u.cwiseMax(0.0);
  const double norm = p.norm();
  if (norm > radius) p *= radius / norm;
  return p;
}

inline ProxResult prox(const ProxKind& kind, const Vector& u, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("prox: step t must be finite and > 0");
  return std::visit(
      [&](const auto& k) -> ProxResult {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroReg>) {
          return {u, Vector::Zero(u.size())};
        } else if constexpr (std::is_same_v<K, BoxIndicator>) {
          Vector p = u.cwiseMax(k.lo).cwiseMin(k.hi);
          Vector cert = (u - p) / t;
          return {std::move(p), std::move(cert)};
        } else if constexpr (std::is_same_v<K, NonnegBallIndicator>) {
          Vector p = project_nonneg_ball(u, k.radius);
          Vector cert = (u - p) / t;
          return {std::move(p), std::move(cert)};
        } else {
          // Soft threshold; |u_i| == t*w maps to 0.
          const double thr = t * k.weight;
          Vector p(u.size());
          for (Index i = 0; i < u.size(); ++i) {
            const double a = std::abs(u[i]);
            p[i] = a <= thr ? 0.0 : std::copysign(a - thr, u[i]);
          }
          Vector cert = (u - p) / t;
          return {std::move(p), std::move(cert)};
        }
      },
      kind);
}

namespace detail {
// Membership slack for indicator domains: projections land on the boundary
// only up to rounding.
inline constexpr double kDomainTol = 1e-12;
}  // namespace detail

inline double g_value(const ProxKind& kind, const Vector& x) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroReg>) {
          return 0.0;
        } else if constexpr (std::is_same_v<K, BoxIndicator>) {
          for (Index i = 0; i < x.size(); ++i)
            if (!(x[i] >= k.lo && x[i] <= k.hi)) return kInf;
          return 0.0;
        } else if constexpr (std::is_same_v<K, NonnegBallIndicator>) {
          if ((x.array() < 0.0).any() || !x.allFinite()) return kInf;
          return x.norm() <= k.radius * (1.0 + detail::kDomainTol) ? 0.0 : kInf;
        } else {
          return k.weight * x.lpNorm<1>();
        }
      },
      kind);
}

/// Projection of v onto the tangent cone of {x >= 0, ||x|| <= radius} at x.
///
/// The cone is the intersection of {d_i >= 0 : x_i active at 0} and, when x
/// sits on the sphere, the half-space {<x, d> <= 0}. The projection onto the
/// intersection is computed with Dykstra's alternating projections (at most
/// 200 sweeps, fixed-point tolerance 1e-10).
inline Vector tangent_project_nonneg_ball(const Vector& x, const Vector& v, double radius,
                                          double active_tol = 1e-10) {
  const Index n = x.size();
  const double xnorm = x.norm();
  const bool on_sphere = xnorm >= radius * (1.0 - active_tol);
  auto project_orthant_face = [&](const Vector& d) {
    Vector out = d;
    for (Index i = 0; i < n; ++i)
      if (x[i] <= active_tol && out[i] < 0.0) out[i] = 0.0;
    return out;
  };
  if (!on_sphere || xnorm == 0.0) return project_orthant_face(v);

  auto project_halfspace = [&](const Vector& d) {
    const double s = x.dot(d);
    if (s <= 0.0) return Vector(d);
    return Vector(d - (s / (xnorm * xnorm)) * x);
  };

  Vector cur = v;
  Vector p = Vector::Zero(n);
  Vector q = Vector::Zero(n);
  for (int sweep = 0; sweep < 200; ++sweep) {
    const Vector y = project_orthant_face(cur + p);
    p = cur + p - y;
    const Vector next = project_halfspace(y + q);
    q = y + q - next;
    const double change = (next - cur).norm();
    cur = next;
    if (change <= 1e-10 * (1.0 + v.norm())) break;
  }
  return cur;
}

/// Projection of v onto the tangent cone of the domain of g at x, which is
/// the polar of the horizon subdifferential for the convex g shipped here.
/// Lipschitz g (zero, l1) have a trivial horizon subdifferential, so v is
/// returned unchanged.
inline Vector horizon_tangent_project(const ProxKind& kind, const Vector& x, const Vector& v) {
  return std::visit(
      [&](const auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, BoxIndicator>) {
          Vector out = v;
          for (Index i = 0; i < x.size(); ++i) {
            if (x[i] <= k.lo && out[i] < 0.0) out[i] = 0.0;
            if (x[i] >= k.hi && out[i] > 0.0) out[i] = 0.0;
          }
          return out;
        } else if constexpr (std::is_same_v<K, NonnegBallIndicator>) {
          return tangent_project_nonneg_ball(x, v, k.radius);
        } else {
          return v;
        }
      },
      kind);
}

/// Element of the subdifferential of g at x closest to w. Used where no prox
/// certificate is available yet (the initial point of a run).
inline Vector nearest_subgradient(const ProxKind& kind, const Vector& x, const Vector& w) {
  return std::visit(
      [&](const auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroReg>) {
          return Vector::Zero(x.size());
        } else if constexpr (std::is_same_v<K, L1Norm>) {
          Vector out(x.size());
          for (Index i = 0; i < x.size(); ++i)
            out[i] = x[i] != 0.0 ? std::copysign(k.weight, x[i])
                                 : std::clamp(w[i], -k.weight, k.weight);
          return out;
        } else {
          // Indicators: Moreau decomposition, proj_N(w) = w - proj_T(w).
          return w - horizon_tangent_project(kind, x, w);
        }
      },
      kind);
}

}  // namespace lipal

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lipal/problem.hpp"
#include "lipal/trace.hpp"

namespace lipal {

/// Rows k >= 2 where
///   P_k - P_{k-1} <= -(beta_k / 8) ||dx_k||^2 - tau (1 - tau) / (2 rho) ||dy_k||^2
/// fails by more than 1e-8 (1 + |P_{k-1}|). Returns the offending k values.
inline std::vector<int> check_lyapunov_decrease(const std::vector<TraceRow>& rows, double tau,
                                                double rho) {
  std::vector<int> bad;
  const double dual_coeff = tau * (1.0 - tau) / (2.0 * rho);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const TraceRow& prev = rows[i - 1];
    const TraceRow& cur = rows[i];
    if (!std::isfinite(prev.lyapunov) || !std::isfinite(cur.lyapunov)) continue;
    const double rhs = -cur.beta / 8.0 * cur.dx_norm * cur.dx_norm -
                       dual_coeff * cur.dy_norm * cur.dy_norm +
                       1e-8 * (1.0 + std::abs(prev.lyapunov));
    if (cur.lyapunov - prev.lyapunov > rhs) bad.push_back(cur.k);
  }
  return bad;
}

/// min over k of (rho / tau) max_{i <= k} ||F(x^i)|| - ||y^k - y0||.
/// Needs the in-memory dual iterates on every row.
inline double check_dual_bound(const std::vector<TraceRow>& rows, const Vector& y0, double rho,
                               double tau) {
  if (rows.empty()) throw InvalidInput("check_dual_bound: empty trace");
  if (!(tau > 0.0)) throw InvalidInput("check_dual_bound: tau must be > 0");
  double running_max = 0.0;
  double slack = kInf;
  for (const TraceRow& r : rows) {
    if (r.y.size() != y0.size()) throw InvalidInput("check_dual_bound: trace row lacks y");
    running_max = std::max(running_max, r.feas);
    slack = std::min(slack, rho / tau * running_max - (r.y - y0).norm());
  }
  return slack;
}

struct SigmaEstimate {
  double sigma_hat = kInf;
  /// Samples that entered the minimum (F(x) != 0).
  int samples = 0;
  int skipped = 0;
  Vector argmin;
};

using TangentProjector = std::function<Vector(const Vector& x, const Vector& v)>;

/// sigma_hat = min over samples of dist(-J^T F, N(x)) / ||F||, with the
/// distance computed as the norm of the tangent-cone projection. The default
/// projector uses the horizon cone of the oracle's regularizer.
inline SigmaEstimate estimate_sigma(const ProblemOracle& oracle,
                                    const std::function<Vector()>& sampler, int num_samples,
                                    TangentProjector project = {}) {
  if (num_samples < 1) throw InvalidInput("estimate_sigma: num_samples must be >= 1");
  if (!project) {
    const ProxKind kind = oracle.regularizer();
    project = [kind](const Vector& x, const Vector& v) {
      return horizon_tangent_project(kind, x, v);
    };
  }
  SigmaEstimate est;
  for (int i = 0; i < num_samples; ++i) {
    const Vector x = sampler();
    const Vector F = eval::F(oracle, x);
    const double fn = F.norm();
    if (fn <= 1e-14) {
      ++est.skipped;
      continue;
    }
    const double ratio = project(x, -eval::Jt(oracle, x, F)).norm() / fn;
    ++est.samples;
    if (ratio < est.sigma_hat) {
      est.sigma_hat = ratio;
      est.argmin = x;
    }
  }
  if (est.samples == 0) throw InvalidInput("estimate_sigma: every sample was feasible");
  return est;
}

}  // namespace lipal

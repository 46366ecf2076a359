// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lipal/core.hpp"

namespace lipal {

/// Stage schedule: rho_s = rho0 delta1^s, tau_s = tau0 delta2^s.
inline double stage_rho(const SolverConfig& c, int s) { return c.rho * std::pow(c.delta1, s); }
inline double stage_tau(const SolverConfig& c, int s) { return c.tau * std::pow(c.delta2, s); }

/// Upper bound on the number of stages:
///   floor((log tau0 + log(M + 1 + ||y0bar||) - log rho0 - log eps)
///         / (log delta1 - log delta2)) + 1,
/// clamped below at 1.
inline int stage_bound(double tau0, double rho0, double delta1, double delta2, double grad_bound,
                       double dual_bound, double eps) {
  const double num = std::log(tau0) + std::log(grad_bound + 1.0 + dual_bound) - std::log(rho0) -
                     std::log(eps);
  const double den = std::log(delta1) - std::log(delta2);
  return std::max(1, static_cast<int>(std::floor(num / den)) + 1);
}

/// Runs LIPAL in stages of growing rho / tau, warm-starting each stage from
/// the previous one. Stages stop on stationarity alone; the run stops once a
/// stage ends with feasibility <= eps_feas or after max_stages.
inline RunReport run_adaptive(const ProblemOracle& oracle, const Vector& x0, const Vector& y0,
                              const SolverConfig& config) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  config.validate();

  RunReport out;
  out.config = config;
  out.y0 = y0;
  out.status = "max_stages";

  Vector x = x0;
  Vector y = y0;
  LoopOptions options;
  options.require_feasibility = false;
  options.min_iterations = 1;

  for (int s = 0; s < config.max_stages; ++s) {
    SolverConfig stage_cfg = config;
    stage_cfg.rho = stage_rho(config, s);
    stage_cfg.tau = stage_tau(config, s);

    StageRecord rec;
    rec.s = s;
    rec.rho = stage_cfg.rho;
    rec.tau = stage_cfg.tau;
    rec.inner = run_lipal(oracle, x, y, stage_cfg, options);
    const RunReport& r = rec.inner;
    rec.feasible_at_exit = r.feasibility <= config.eps_feas;

    if (s == 0) out.init_warning = r.init_warning;
    out.outer_iterations += r.outer_iterations;
    out.total_inner_iterations += r.total_inner_iterations;
    out.max_grad_norm = std::max(out.max_grad_norm, r.max_grad_norm);
    out.stationarity_bound_violations += r.stationarity_bound_violations;
    const double stage_start =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count() - r.ms;
    for (std::size_t i = out.trace.empty() ? 0 : 1; i < r.trace.size(); ++i) {
      TraceRow row = r.trace[i];
      row.k = out.trace.empty() ? 0 : out.trace.back().k + 1;
      row.ms += stage_start;
      out.trace.push_back(std::move(row));
    }

    x = r.x;
    y = r.y;
    out.f = r.f;
    out.g = r.g;
    out.feasibility = r.feasibility;
    out.stationarity = r.stationarity;
    out.final_beta = r.final_beta;
    out.certificate = r.certificate;
    const bool feasible = rec.feasible_at_exit;
    const bool stationary = r.converged;
    out.stages.push_back(std::move(rec));
    log::info("stage ", s, ": rho=", stage_cfg.rho, " tau=", stage_cfg.tau, " feas=",
              out.feasibility, " stat=", out.stationarity);
    if (feasible) {
      out.converged = stationary;
      out.status = stationary ? "converged" : "max_outer";
      break;
    }
  }
  out.x = std::move(x);
  out.y = std::move(y);
  out.ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return out;
}

}  // namespace lipal

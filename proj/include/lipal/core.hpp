// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "lipal/config.hpp"
#include "lipal/inner_solver.hpp"
#include "lipal/lagrangian.hpp"
#include "lipal/log.hpp"
#include "lipal/problem.hpp"
#include "lipal/report.hpp"

namespace lipal {

/// (x^k, y^k) with everything the next step needs cached at x^k.
struct IterateState {
  int k = 0;
  Vector x;
  Vector y;
  Vector y_prev;
  /// Subgradient of g at x (from the prox call that produced x).
  Vector certificate;
  Vector F;
  double f = 0.0;
  double g = 0.0;
  /// Proximal weight in force; never decreases within a run.
  double beta = 1.0;

  static IterateState initial(const ProblemOracle& oracle, const Vector& x0, const Vector& y0,
                              double beta0) {
    IterateState s;
    s.x = x0;
    s.y = y0;
    s.y_prev = y0;
    s.F = eval::F(oracle, x0);
    s.f = eval::f(oracle, x0);
    s.g = eval::g(oracle, x0);
    if (!std::isfinite(s.g)) throw DomainError("initial point is outside dom g");
    s.beta = beta0;
    const Vector w = -(eval::grad(oracle, x0) + eval::Jt(oracle, x0, y0));
    s.certificate = nearest_subgradient(oracle.regularizer(), x0, w);
    return s;
  }
};

struct BacktrackResult {
  Vector x_plus;
  Vector certificate;
  Vector F_plus;
  double f_plus = 0.0;
  double g_plus = 0.0;
  double beta = 0.0;
  int doublings = 0;
  /// L(x_k, y_k) - L(x+, y_k) - (beta/4) ||x+ - x_k||^2 for the accepted beta.
  double descent_gap = 0.0;
  double descent_tol = 0.0;
  InnerStats inner;
  long inner_total = 0;
};

struct StepOutcome {
  IterateState state;
  KktResidual kkt;
  double descent_gap = 0.0;
  double descent_tol = 0.0;
  int beta_doublings = 0;
  InnerStats inner;
  long inner_total = 0;
  double dx_norm = 0.0;
  double dy_norm = 0.0;
  /// L(x^{k+1}, y^{k+1}; y0), for the Lyapunov trace.
  double al_next = 0.0;
};

inline constexpr int kMaxBetaDoublings = 60;

/// Solves the primal subproblem with the current beta and doubles beta until
///   L(x_k, y_k; y0) - L(x+, y_k; y0) >= (beta/4) ||x+ - x_k||^2
/// holds to a relative tolerance of 1e-10. With config.certify_steps the step
/// must in addition satisfy
///   stat(x+, y+) <= 2 beta ||dx|| + eps_sub (1 + ||dx||)
/// and with config.lyapunov_steps, when y0 is given and k >= 1,
///   P_{k+1} - P_k <= -(beta/8) ||dx||^2 - tau (1 - tau) / (2 rho) ||dy||^2.
inline BacktrackResult backtrack_beta(const ProblemOracle& oracle, const IterateState& state,
                                      const Vector& y_tau, const SolverConfig& config,
                                      const Vector* y0 = nullptr) {
  if (!(state.beta > 0.0)) throw InvalidInput("backtrack_beta: beta must be > 0");
  const double rho = config.rho;
  const double tau = config.tau;
  const double al_before = perturbed_al_from_parts(state.f, state.g, state.F, y_tau, rho);
  const double tol = 1e-10 * (1.0 + std::abs(al_before));
  const bool check_lyapunov = config.lyapunov_steps && y0 != nullptr && state.k >= 1 && tau < 1.0;
  const double P_before =
      check_lyapunov ? lyapunov_from_parts(al_before, state.y, state.y_prev, *y0, tau, rho) : 0.0;

  SubproblemSpec spec = SubproblemSpec::at(oracle, state.x, y_tau, rho, state.beta);
  Vector full_grad;  // gradient of the smooth part of L at x_k (prox-gradient variant)
  if (config.variant == Variant::prox_gradient)
    full_grad = spec.grad_anchor + eval::Jt(oracle, state.x, y_tau + rho * spec.F_anchor);

  BacktrackResult out;
  double beta = state.beta;
  for (int doubling = 0; doubling <= kMaxBetaDoublings; ++doubling, beta *= 2.0) {
    spec.beta = beta;
    Vector x_plus, cert;
    InnerStats inner;
    if (config.variant == Variant::gauss_newton) {
      SubproblemResult sub = solve_subproblem(spec, state.x, config.eps_sub, config.max_inner);
      x_plus = std::move(sub.x_plus);
      cert = std::move(sub.certificate);
      inner = sub.stats;
    } else {
      ProxResult pr = eval::prox(oracle, state.x - full_grad / beta, 1.0 / beta);
      x_plus = std::move(pr.point);
      cert = std::move(pr.certificate);
      inner.iterations = 1;
      inner.converged = true;
      inner.lipschitz = beta;
      inner.subgrad_norm = (full_grad + beta * (x_plus - state.x) + cert).norm();
    }
    out.inner_total += inner.iterations;

    const double g_plus = eval::g(oracle, x_plus);
    if (!std::isfinite(g_plus)) throw DomainError("backtrack_beta: prox output left dom g");
    const double f_plus = eval::f(oracle, x_plus);
    Vector F_plus = eval::F(oracle, x_plus);
    const double al_after = perturbed_al_from_parts(f_plus, g_plus, F_plus, y_tau, rho);
    const double dx2 = (x_plus - state.x).squaredNorm();
    const double gap = al_before - al_after - 0.25 * beta * dx2;
    if (gap < -tol) {
      log::debug("k=", state.k, " descent test failed at beta=", beta, " gap=", gap);
      continue;
    }

    if (config.certify_steps || check_lyapunov) {
      const double dx = std::sqrt(dx2);
      const Vector y_plus = dual_update(y_tau, rho, F_plus);
      const double stat = kkt_residual(oracle, x_plus, y_plus, cert).stationarity;
      const double bound = 2.0 * beta * dx + config.eps_sub * (1.0 + dx);
      if (config.certify_steps && stat > bound) {
        log::debug("k=", state.k, " stationarity bound failed at beta=", beta, ": ", stat, " > ",
                   bound);
        continue;
      }
      if (check_lyapunov) {
        const double al_next = perturbed_al_from_parts(
            f_plus, g_plus, F_plus, perturbed_dual_blend(*y0, y_plus, tau), rho);
        const double P_after = lyapunov_from_parts(al_next, y_plus, state.y, *y0, tau, rho);
        const double dy2 = (y_plus - state.y).squaredNorm();
        const double allowed = -beta / 8.0 * dx2 - tau * (1.0 - tau) / (2.0 * rho) * dy2 +
                               1e-10 * (1.0 + std::abs(P_before));
        if (P_after - P_before > allowed) {
          log::debug("k=", state.k, " Lyapunov decrease failed at beta=", beta);
          continue;
        }
      }
    }

    out.x_plus = std::move(x_plus);
    out.certificate = std::move(cert);
    out.F_plus = std::move(F_plus);
    out.f_plus = f_plus;
    out.g_plus = g_plus;
    out.beta = beta;
    out.doublings = doubling;
    out.descent_gap = gap;
    out.descent_tol = tol;
    out.inner = inner;
    return out;
  }
  throw NumericalFailure("backtrack_beta: step tests still failing after " +
                         std::to_string(kMaxBetaDoublings) +
                         " doublings of beta (is the oracle smooth?)");
}

/// One outer iteration: blend duals, backtracked primal step, perturbed dual
/// ascent, fresh KKT residual at (x^{k+1}, y^{k+1}).
inline StepOutcome lipal_step(const ProblemOracle& oracle, const IterateState& state,
                              const Vector& y0, const SolverConfig& config) {
  const Vector y_tau = perturbed_dual_blend(y0, state.y, config.tau);
  BacktrackResult bt = backtrack_beta(oracle, state, y_tau, config, &y0);

  StepOutcome out;
  IterateState& next = out.state;
  next.k = state.k + 1;
  next.y = dual_update(y_tau, config.rho, bt.F_plus);
  next.y_prev = state.y;
  next.x = std::move(bt.x_plus);
  next.certificate = std::move(bt.certificate);
  next.F = std::move(bt.F_plus);
  next.f = bt.f_plus;
  next.g = bt.g_plus;
  next.beta = bt.beta;

  out.kkt = kkt_residual(oracle, next.x, next.y, next.certificate);
  out.descent_gap = bt.descent_gap;
  out.descent_tol = bt.descent_tol;
  out.beta_doublings = bt.doublings;
  out.inner = bt.inner;
  out.inner_total = bt.inner_total;
  out.dx_norm = (next.x - state.x).norm();
  out.dy_norm = (next.y - state.y).norm();
  out.al_next = perturbed_al_from_parts(next.f, next.g, next.F,
                                        perturbed_dual_blend(y0, next.y, config.tau), config.rho);
  return out;
}

/// Knobs for embedding the loop in an outer scheme.
struct LoopOptions {
  /// Stop on stationarity alone when false (stages of the adaptive loop).
  bool require_feasibility = true;
  /// Take at least this many steps before the stopping test may fire.
  int min_iterations = 0;
};

/// Runs the outer loop from (x0, y0) until the epsilon-KKT test holds
/// (stationarity <= eps_stat and feasibility <= eps_feas) or max_outer steps.
/// Not converging is reported through the flag, not thrown.
inline RunReport run_lipal(const ProblemOracle& oracle, const Vector& x0, const Vector& y0,
                           const SolverConfig& config, const LoopOptions& options = {}) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  };

  config.validate();
  detail::require_dim(x0, oracle.dim_primal(), "run_lipal x0");
  detail::require_dim(y0, oracle.dim_constraints(), "run_lipal y0");
  detail::require_finite(x0, "run_lipal x0");
  detail::require_finite(y0, "run_lipal y0");

  RunReport report;
  report.config = config;
  report.y0 = y0;

  IterateState state = IterateState::initial(oracle, x0, y0, config.beta0);
  const double F0_sq = state.F.squaredNorm();
  if (F0_sq > std::min(1.0, config.c0 / config.rho)) {
    report.init_warning = true;
    log::info("initial point has ||F(x0)||^2 = ", F0_sq, " > min(1, c0/rho); the Lyapunov upper "
              "bound is not guaranteed");
  }
  KktResidual kkt = kkt_residual(oracle, state.x, state.y, state.certificate);

  auto grad_norm = [&](const Vector& x) { return eval::grad(oracle, x).norm(); };
  report.max_grad_norm = grad_norm(state.x);

  if (config.record_trace) {
    TraceRow row;
    row.k = 0;
    row.f = state.f;
    row.g = state.g;
    row.feas = kkt.feasibility;
    row.stat = kkt.stationarity;
    row.beta = state.beta;
    row.y = state.y;
    row.grad_f_norm = report.max_grad_norm;
    row.ms = elapsed_ms();
    report.trace.push_back(std::move(row));
  }

  auto done = [&](const KktResidual& r) {
    return r.stationarity <= config.eps_stat &&
           (!options.require_feasibility || r.feasibility <= config.eps_feas);
  };

  while (true) {
    if (state.k >= options.min_iterations && done(kkt)) {
      report.converged = true;
      report.status = "converged";
      break;
    }
    if (state.k >= config.max_outer) break;

    StepOutcome step = lipal_step(oracle, state, y0, config);
    report.total_inner_iterations += step.inner_total;

    const double stat_bound =
        2.0 * step.state.beta * step.dx_norm + config.eps_sub * (1.0 + step.dx_norm);
    if (step.kkt.stationarity > stat_bound) {
      ++report.stationarity_bound_violations;
      log::info("k=", step.state.k, " stationarity ", step.kkt.stationarity,
                " exceeds 2 beta ||dx|| + slack = ", stat_bound);
    }
    if (!step.inner.converged)
      log::info("k=", step.state.k, " inner solver hit max_inner (gradient mapping ",
                step.inner.grad_map_norm, ")");

    const double gnorm = grad_norm(step.state.x);
    report.max_grad_norm = std::max(report.max_grad_norm, gnorm);

    if (config.record_trace) {
      TraceRow row;
      row.k = step.state.k;
      row.f = step.state.f;
      row.g = step.state.g;
      row.feas = step.kkt.feasibility;
      row.stat = step.kkt.stationarity;
      row.beta = step.state.beta;
      row.inner_iters = static_cast<int>(step.inner_total);
      row.lyapunov = lyapunov_from_parts(step.al_next, step.state.y, step.state.y_prev, y0,
                                         config.tau, config.rho);
      row.dx_norm = step.dx_norm;
      row.dy_norm = step.dy_norm;
      row.y = step.state.y;
      row.grad_f_norm = gnorm;
      row.descent_gap = step.descent_gap;
      row.descent_tol = step.descent_tol;
      row.beta_doublings = step.beta_doublings;
      row.inner_subgrad = step.inner.subgrad_norm;
      row.ms = elapsed_ms();
      report.trace.push_back(std::move(row));
    }
    log::debug("k=", step.state.k, " stat=", step.kkt.stationarity, " feas=",
               step.kkt.feasibility, " beta=", step.state.beta, " inner=", step.inner_total);

    state = std::move(step.state);
    kkt = step.kkt;
  }

  report.outer_iterations = state.k;
  report.f = state.f;
  report.g = state.g;
  report.feasibility = kkt.feasibility;
  report.stationarity = kkt.stationarity;
  report.final_beta = state.beta;
  report.x = std::move(state.x);
  report.y = std::move(state.y);
  report.certificate = std::move(state.certificate);
  report.ms = elapsed_ms();
  log::info("run finished: ", report.status, " after ", report.outer_iterations,
            " iterations, stat=", report.stationarity, " feas=", report.feasibility);
  return report;
}

}  // namespace lipal

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "lipal/errors.hpp"

namespace lipal {

/// How the primal subproblem is formed.
enum class Variant {
  /// Linearize f and F, keep g and the squared linearized constraint exact
  /// (prox-linear / Gauss-Newton step), solved by accelerated prox-gradient.
  gauss_newton,
  /// Linearize the whole smooth part of the perturbed augmented Lagrangian:
  /// a single proximal gradient step per outer iteration.
  prox_gradient,
};

inline std::string_view to_string(Variant v) {
  return v == Variant::gauss_newton ? "gauss_newton" : "prox_gradient";
}

inline Variant variant_from_string(std::string_view s) {
  if (s == "gauss_newton" || s == "lipal") return Variant::gauss_newton;
  if (s == "prox_gradient" || s == "alms") return Variant::prox_gradient;
  throw InvalidInput("unknown variant '" + std::string(s) + "'");
}

struct SolverConfig {
  /// Perturbation weight in (0, 1]; 1 gives the quadratic penalty method.
  double tau = 1e-5;
  double rho = 10.0;
  /// Initial proximal weight; backtracking only ever doubles it.
  double beta0 = 1.0;
  double eps_stat = 1e-1;
  double eps_feas = 1e-3;
  /// Inner solver stops when the gradient mapping norm drops below this.
  double eps_sub = 1e-3;
  /// Inexactness constant; 0 means record the implied value, never enforce.
  double alpha_inexact = 0.0;
  int max_outer = 1000;
  int max_inner = 5000;
  /// Stage multipliers of the adaptive outer loop: rho *= delta1, tau *= delta2.
  double delta1 = 10.0;
  double delta2 = 0.5;
  int max_stages = 20;
  std::uint64_t seed = 1;
  Variant variant = Variant::gauss_newton;
  /// Initialization budget: ||F(x0)||^2 <= min(1, c0 / rho) is expected.
  double c0 = 0.0;
  /// Reference penalty of the level-set assumption; informational.
  double rho0 = 0.0;
  /// Keep a per-iteration trace in the run report.
  bool record_trace = true;
  /// Besides the descent test, keep doubling beta until the step also meets
  /// the stationarity bound 2 beta ||dx|| + eps_sub (1 + ||dx||).
  bool certify_steps = true;
  /// Also require the Lyapunov decrease of each step before accepting beta.
  bool lyapunov_steps = false;

  void validate() const {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw InvalidInput(std::string("SolverConfig: ") + msg);
    };
    require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1]");
    require(rho > 0.0 && std::isfinite(rho), "rho must be > 0");
    require(beta0 > 0.0 && std::isfinite(beta0), "beta0 must be > 0");
    require(eps_stat > 0.0, "eps_stat must be > 0");
    require(eps_feas > 0.0, "eps_feas must be > 0");
    require(eps_sub > 0.0, "eps_sub must be > 0");
    require(alpha_inexact >= 0.0, "alpha_inexact must be >= 0");
    require(max_outer >= 0, "max_outer must be >= 0");
    require(max_inner >= 1, "max_inner must be >= 1");
    require(delta1 > 1.0, "delta1 must be > 1");
    require(delta2 > 0.0 && delta2 < 1.0, "delta2 must lie in (0, 1)");
    require(max_stages >= 1, "max_stages must be >= 1");
    require(c0 >= 0.0, "c0 must be >= 0");
    require(rho0 >= 0.0, "rho0 must be >= 0");
  }
};

}  // namespace lipal

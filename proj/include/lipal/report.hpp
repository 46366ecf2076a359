// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipal/config.hpp"
#include "lipal/trace.hpp"

namespace lipal {

struct StageRecord;

/// Summary of one solver run (or of an adaptive run, with its stages).
struct RunReport {
  bool converged = false;
  /// converged | max_outer | max_stages
  std::string status = "max_outer";
  int outer_iterations = 0;
  long total_inner_iterations = 0;
  double f = 0.0;
  double g = 0.0;
  double feasibility = 0.0;
  double stationarity = 0.0;
  double ms = 0.0;
  SolverConfig config;

  Vector x;
  Vector y;
  Vector y0;
  Vector certificate;

  std::vector<TraceRow> trace;
  std::vector<StageRecord> stages;
  std::string trace_path;

  /// x0 violated ||F(x0)||^2 <= min(1, c0 / rho).
  bool init_warning = false;
  /// max ||grad f|| over the iterates visited.
  double max_grad_norm = 0.0;
  /// Steps that broke the stationarity bound 2 beta ||dx|| + eps_sub (1 + ||dx||).
  int stationarity_bound_violations = 0;
  double final_beta = 0.0;

  // Filled in by the command layer.
  std::string instance;
  std::optional<double> x_error;
  std::optional<double> y_error;
  std::optional<double> ari;
};

struct StageRecord {
  int s = 0;
  double rho = 0.0;
  double tau = 0.0;
  RunReport inner;
  bool feasible_at_exit = false;
};

namespace detail {
inline nlohmann::json vec_json(const Vector& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}
}  // namespace detail

inline nlohmann::json config_json(const SolverConfig& c) {
  return {{"tau", c.tau},           {"rho", c.rho},
          {"beta0", c.beta0},       {"eps_stat", c.eps_stat},
          {"eps_feas", c.eps_feas}, {"eps_sub", c.eps_sub},
          {"alpha_inexact", c.alpha_inexact},
          {"max_outer", c.max_outer}, {"max_inner", c.max_inner},
          {"delta1", c.delta1},     {"delta2", c.delta2},
          {"max_stages", c.max_stages}, {"seed", c.seed},
          {"variant", std::string(to_string(c.variant))},
          {"c0", c.c0},             {"rho0", c.rho0}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j = {
      {"converged", r.converged},
      {"status", r.status},
      {"outer_iterations", r.outer_iterations},
      {"total_inner_iterations", r.total_inner_iterations},
      {"f", r.f},
      {"g", r.g},
      {"feasibility", r.feasibility},
      {"stationarity", r.stationarity},
      {"ms", r.ms},
      {"config", config_json(r.config)},
      {"init_warning", r.init_warning},
      {"max_grad_norm", r.max_grad_norm},
      {"final_beta", r.final_beta},
      {"stationarity_bound_violations", r.stationarity_bound_violations},
      {"x", detail::vec_json(r.x)},
      {"y", detail::vec_json(r.y)},
      {"certificate", detail::vec_json(r.certificate)},
  };
  if (!r.instance.empty()) j["instance"] = r.instance;
  if (!r.trace_path.empty()) j["trace_path"] = r.trace_path;
  if (r.x_error) j["x_error"] = *r.x_error;
  if (r.y_error) j["y_error"] = *r.y_error;
  if (r.ari) j["ari"] = *r.ari;
  if (!r.stages.empty()) {
    nlohmann::json stages = nlohmann::json::array();
    for (const StageRecord& s : r.stages) {
      nlohmann::json inner = to_json(s.inner);
      // The stage iterates repeat the parent's final vectors; keep stages small.
      inner.erase("x");
      inner.erase("y");
      inner.erase("certificate");
      stages.push_back({{"s", s.s},
                        {"rho", s.rho},
                        {"tau", s.tau},
                        {"feasible_at_exit", s.feasible_at_exit},
                        {"report", std::move(inner)}});
    }
    j["stages"] = std::move(stages);
  }
  return j;
}

}  // namespace lipal

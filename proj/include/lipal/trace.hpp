// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lipal/errors.hpp"
#include "lipal/prox.hpp"

namespace lipal {

/// One outer iteration. Row k describes the iterate x^k; the step-related
/// fields (beta, inner_iters, dx_norm, dy_norm) describe the step that
/// produced it, so they are NaN/0 on row 0.
struct TraceRow {
  int k = 0;
  double f = 0.0;
  double g = 0.0;
  double feas = 0.0;
  double stat = 0.0;
  double beta = 0.0;
  int inner_iters = 0;
  /// P(x^k, y^k, y^{k-1}; y0); NaN on row 0.
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double dx_norm = std::numeric_limits<double>::quiet_NaN();
  double dy_norm = std::numeric_limits<double>::quiet_NaN();
  double ms = 0.0;

  // In-memory only; not part of the CSV schema.
  Vector y;
  double grad_f_norm = 0.0;
  /// L(x^{k-1}, y^{k-1}) - L(x^k, y^{k-1}) - (beta/4) ||dx||^2
  double descent_gap = 0.0;
  /// tolerance the descent test used on this step
  double descent_tol = 0.0;
  int beta_doublings = 0;
  /// ||s|| of the inner solve (subgradient of Q_k at the accepted point).
  double inner_subgrad = 0.0;
};

inline constexpr const char* kTraceHeader = "k,f,g,feas,stat,beta,inner_iters,lyapunov,dx_norm,dy_norm,ms";

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << kTraceHeader << '\n';
  for (const TraceRow& r : rows) {
    using detail::fmt17;
    os << r.k << ',' << fmt17(r.f) << ',' << fmt17(r.g) << ',' << fmt17(r.feas) << ','
       << fmt17(r.stat) << ',' << fmt17(r.beta) << ',' << r.inner_iters << ','
       << fmt17(r.lyapunov) << ',' << fmt17(r.dx_norm) << ',' << fmt17(r.dy_norm) << ','
       << fmt17(r.ms) << '\n';
  }
}

inline void write_trace(const std::vector<TraceRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_trace: cannot open '" + path + "' for writing");
  write_trace(out, rows);
  out.flush();
  if (!out) throw Error("write_trace: write to '" + path + "' failed");
}

inline std::vector<TraceRow> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ParseError("trace: missing or unexpected header", 1);
  std::vector<TraceRow> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw ParseError("trace: expected 11 columns", lineno);
    auto num = [&](std::size_t c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str() || *end != '\0')
        throw ParseError("trace: non-numeric cell", lineno, static_cast<long>(c) + 1);
      return v;
    };
    TraceRow r;
    r.k = static_cast<int>(num(0));
    r.f = num(1);
    r.g = num(2);
    r.feas = num(3);
    r.stat = num(4);
    r.beta = num(5);
    r.inner_iters = static_cast<int>(num(6));
    r.lyapunov = num(7);
    r.dx_norm = num(8);
    r.dy_norm = num(9);
    r.ms = num(10);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TraceRow> read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_trace: cannot open '" + path + "'");
  return read_trace(in);
}

}  // namespace lipal

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "lipal/problem.hpp"

namespace lipal {

using Labels = std::vector<int>;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Data for the Burer-Monteiro k-means relaxation. Rows of A are points.
struct MsscInstance {
  Eigen::MatrixXd A;
  int k = 0;
  int r = 0;
  std::optional<Labels> labels;
  std::optional<std::uint64_t> seed;

  Index m() const { return A.rows(); }
  Index d() const { return A.cols(); }

  void validate() const {
    if (k < 1) throw InvalidInput("mssc: k must be >= 1");
    if (r < k) throw InvalidInput("mssc: r must be >= k");
    if (A.rows() < k) throw InvalidInput("mssc: need at least k points");
    if (!A.allFinite()) throw InvalidInput("mssc: data contains non-finite entries");
    if (labels && static_cast<Index>(labels->size()) != A.rows())
      throw InvalidInput("mssc: label count does not match point count");
  }
};

inline nlohmann::json sidecar_json(const MsscInstance& inst) {
  nlohmann::json j = {{"m", inst.m()}, {"d", inst.d()}, {"k", inst.k}, {"r", inst.r}};
  j["seed"] = inst.seed ? nlohmann::json(*inst.seed) : nlohmann::json(nullptr);
  return j;
}

/// x = vec of the rows of X (m x r).
///   f(x)   = ||A||_F^2 - ||A^T X||_F^2
///   F_i(x) = x_i^T s - 1,        s = sum_j x_j
///   g      = indicator of {x >= 0, ||x|| <= sqrt(r)}
/// With shifted_F the constraint is x_i^T (s - 1_r) instead.
class MsscOracle final : public ProblemOracle {
 public:
  explicit MsscOracle(MsscInstance inst, bool shifted_F = false)
      : inst_(std::move(inst)), shifted_F_(shifted_F) {
    inst_.validate();
    trace_G_ = inst_.A.squaredNorm();
  }

  Index dim_primal() const override { return inst_.m() * inst_.r; }
  Index dim_constraints() const override { return inst_.m(); }

  double smooth_value(const Vector& x) const override {
    return trace_G_ - (inst_.A.transpose() * view(x)).squaredNorm();
  }

  Vector smooth_grad(const Vector& x) const override {
    const auto X = view(x);
    RowMajorMatrix G = -2.0 * (inst_.A * (inst_.A.transpose() * X));
    return Eigen::Map<const Vector>(G.data(), G.size());
  }

  Vector constraints(const Vector& x) const override {
    const auto X = view(x);
    Vector F = X * shifted_sum(X);
    if (!shifted_F_) F.array() -= 1.0;
    return F;
  }

  Vector jac_apply(const Vector& x, const Vector& d) const override {
    detail::require_dim(d, dim_primal(), "MsscOracle::jac_apply");
    const auto X = view(x);
    const auto D = view(d);
    const Vector d_sum = D.colwise().sum().transpose();
    return D * shifted_sum(X) + X * d_sum;
  }

  Vector jac_transpose_apply(const Vector& x, const Vector& v) const override {
    detail::require_dim(v, dim_constraints(), "MsscOracle::jac_transpose_apply");
    const auto X = view(x);
    const Vector xtv = X.transpose() * v;
    RowMajorMatrix out = v * shifted_sum(X).transpose();
    out.rowwise() += xtv.transpose();
    return Eigen::Map<const Vector>(out.data(), out.size());
  }

  ProxKind regularizer() const override {
    return NonnegBallIndicator{std::sqrt(static_cast<double>(inst_.r))};
  }

  const MsscInstance& instance() const { return inst_; }
  bool shifted_F() const { return shifted_F_; }
  double trace_G() const { return trace_G_; }

  Eigen::Map<const RowMajorMatrix> view(const Vector& x) const {
    detail::require_dim(x, dim_primal(), "MsscOracle");
    return {x.data(), inst_.m(), inst_.r};
  }

 private:
  template <typename Mat>
  Vector shifted_sum(const Mat& X) const {
    Vector s = X.colwise().sum().transpose();
    if (shifted_F_) s.array() -= 1.0;
    return s;
  }

  MsscInstance inst_;
  bool shifted_F_;
  double trace_G_ = 0.0;
};

/// Number of clusters used by a labeling (max label + 1), checking that every
/// cluster in [0, k) is nonempty.
inline int count_clusters(const Labels& labels) {
  if (labels.empty()) throw InvalidInput("labels: empty labeling");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  if (*std::min_element(labels.begin(), labels.end()) < 0)
    throw InvalidInput("labels: negative cluster index");
  std::vector<int> sizes(k, 0);
  for (int l : labels) ++sizes[l];
  for (int j = 0; j < k; ++j)
    if (sizes[j] == 0) throw InvalidInput("labels: cluster " + std::to_string(j) + " is empty");
  return k;
}

/// X_ij = 1/sqrt(n_j) when point i is in cluster j. Then X X^T 1 = 1 exactly
/// in exact arithmetic and ||x||^2 = k.
inline Vector feasible_init(Index m, int r, const Labels& labels) {
  if (static_cast<Index>(labels.size()) != m)
    throw InvalidInput("feasible_init: label count does not match m");
  const int k = count_clusters(labels);
  if (k > r) throw InvalidInput("feasible_init: more clusters than columns (k > r)");
  std::vector<int> sizes(k, 0);
  for (int l : labels) ++sizes[l];
  RowMajorMatrix X = RowMajorMatrix::Zero(m, r);
  for (Index i = 0; i < m; ++i) X(i, labels[i]) = 1.0 / std::sqrt(static_cast<double>(sizes[labels[i]]));
  return Eigen::Map<const Vector>(X.data(), X.size());
}

/// Near-balanced labeling (cluster sizes differ by at most one), shuffled.
inline Labels balanced_labels(Index m, int k, std::mt19937_64& rng) {
  if (k < 1 || m < k) throw InvalidInput("balanced_labels: need 1 <= k <= m");
  Labels labels(m);
  for (Index i = 0; i < m; ++i) labels[i] = static_cast<int>(i % k);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

struct SyntheticData {
  Eigen::MatrixXd A;
  Labels labels;
  Eigen::MatrixXd centers;
};

/// k unit balls with pairwise center distance >= min_separation; m points
/// drawn uniformly inside them with a near-balanced assignment.
inline SyntheticData synth_balls(Index m, Index d, int k, double min_separation,
                                 std::uint64_t seed) {
  if (m < 1 || d < 1 || k < 1 || m < k) throw InvalidInput("synth_balls: need m >= k >= 1, d >= 1");
  if (!(min_separation > 2.0)) throw InvalidInput("synth_balls: min_separation must exceed 2");
  constexpr long kMaxAttempts = 100000;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto unit_ball_point = [&](double radius) {
    Vector g(d);
    for (Index t = 0; t < d; ++t) g[t] = normal(rng);
    const double norm = g.norm();
    if (norm == 0.0) return Vector(Vector::Zero(d));
    return Vector(g * (radius * std::pow(unif(rng), 1.0 / static_cast<double>(d)) / norm));
  };

  // Sampling radius scaled so that k separated centers comfortably fit.
  const double radius = min_separation * std::max(1.0, std::pow(static_cast<double>(k), 1.0 / d));
  SyntheticData out;
  out.centers.resize(k, d);
  long attempts = 0;
  for (int j = 0; j < k; ++j) {
    while (true) {
      if (++attempts > kMaxAttempts)
        throw InvalidInput("synth_balls: could not place centers with the requested separation");
      const Vector c = unit_ball_point(radius);
      bool ok = true;
      for (int q = 0; q < j && ok; ++q)
        ok = (out.centers.row(q).transpose() - c).norm() >= min_separation;
      if (ok) {
        out.centers.row(j) = c.transpose();
        break;
      }
    }
  }

  out.labels = balanced_labels(m, k, rng);
  out.A.resize(m, d);
  for (Index i = 0; i < m; ++i)
    out.A.row(i) = out.centers.row(out.labels[i]) + unit_ball_point(1.0).transpose();
  return out;
}

/// label(i) = argmax_j X_ij over columns whose max exceeds 1e-6, lowest index
/// on ties. Surviving columns are renumbered 0, 1, ... in column order.
inline Labels extract_labels(const Vector& x, Index m, int r) {
  if (m < 1 || r < 1 || x.size() != m * r)
    throw InvalidInput("extract_labels: x must have length m * r");
  Eigen::Map<const RowMajorMatrix> X(x.data(), m, r);
  std::vector<int> keep;
  for (int j = 0; j < r; ++j)
    if (X.col(j).maxCoeff() >= 1e-6) keep.push_back(j);
  if (keep.empty()) throw InvalidInput("extract_labels: X has no nonzero column");
  Labels labels(m);
  for (Index i = 0; i < m; ++i) {
    int best = 0;
    for (int c = 1; c < static_cast<int>(keep.size()); ++c)
      if (X(i, keep[c]) > X(i, keep[best])) best = c;
    labels[i] = best;
  }
  return labels;
}

/// Renumbers nonnegative labels to 0..c-1, keeping their relative order.
inline Labels compact_labels(Labels labels) {
  std::map<int, int> index;
  for (int l : labels) {
    if (l < 0) throw InvalidInput("compact_labels: negative label");
    index.emplace(l, 0);
  }
  int next = 0;
  for (auto& [label, id] : index) id = next++;
  for (int& l : labels) l = index[l];
  return labels;
}

/// Greedily merges the pair of clusters with the smallest Ward cost
/// n_a n_b / (n_a + n_b) ||mu_a - mu_b||^2 until at most k remain. Unused
/// label values are squeezed out first; the lower index survives a merge.
inline Labels merge_to_k(const Eigen::MatrixXd& A, Labels labels, int k) {
  if (static_cast<Index>(labels.size()) != A.rows())
    throw InvalidInput("merge_to_k: label count does not match point count");
  if (k < 1) throw InvalidInput("merge_to_k: k must be >= 1");
  labels = compact_labels(std::move(labels));
  int c = count_clusters(labels);
  while (c > k) {
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(c, A.cols());
    Vector n = Vector::Zero(c);
    for (Index i = 0; i < A.rows(); ++i) {
      mu.row(labels[i]) += A.row(i);
      n[labels[i]] += 1.0;
    }
    for (int j = 0; j < c; ++j) mu.row(j) /= n[j];
    double best = kInf;
    int keep = 0, drop = 1;
    for (int a = 0; a < c; ++a)
      for (int b = a + 1; b < c; ++b) {
        const double cost = n[a] * n[b] / (n[a] + n[b]) * (mu.row(a) - mu.row(b)).squaredNorm();
        if (cost < best) {
          best = cost;
          keep = a;
          drop = b;
        }
      }
    for (int& l : labels) {
      if (l == drop) l = keep;
      else if (l > drop) --l;
    }
    --c;
  }
  return labels;
}

/// Adjusted Rand index from the pair-counting contingency table.
inline double adjusted_rand_index(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw InvalidInput("adjusted_rand_index: length mismatch");
  const double n = static_cast<double>(a.size());
  auto choose2 = [](double v) { return v * (v - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, v] : cells) sum_cells += choose2(v);
  for (const auto& [key, v] : rows) sum_rows += choose2(v);
  for (const auto& [key, v] : cols) sum_cols += choose2(v);
  const double total = choose2(n);
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  // Both labelings trivial (one cluster, or all singletons): identical.
  if (max_index == expected) return 1.0;
  return (sum_cells - expected) / (max_index - expected);
}

/// Parses a numeric CSV. The label column is given either as a 0-based index
/// (negative counts from the end) or as a header name. A first row with any
/// non-numeric feature cell is treated as a header.
inline MsscInstance load_csv(std::istream& in, const std::optional<std::string>& label_column = {},
                             bool standardize = false) {
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  auto parse_number = [](const std::string& s, double& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
  };

  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_of;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
    line_of.push_back(lineno);
  }
  if (rows.empty()) throw ParseError("csv: no data");

  const long width = static_cast<long>(rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (static_cast<long>(rows[i].size()) != width)
      throw ParseError("csv: expected " + std::to_string(width) + " columns, found " +
                           std::to_string(rows[i].size()),
                       line_of[i]);

  // Resolve the label column against a possible header.
  std::optional<long> label_idx;
  bool named_label = false;
  if (label_column) {
    long idx = 0;
    std::size_t used = 0;
    bool numeric = false;
    try {
      idx = std::stol(*label_column, &used);
      numeric = used == label_column->size();
    } catch (const std::exception&) {
      numeric = false;
    }
    if (numeric) {
      if (idx < 0) idx += width;
      if (idx < 0 || idx >= width) throw InvalidInput("csv: label column index out of range");
      label_idx = idx;
    } else {
      const auto& head = rows.front();
      const auto it = std::find(head.begin(), head.end(), *label_column);
      if (it == head.end()) throw InvalidInput("csv: no column named '" + *label_column + "'");
      label_idx = it - head.begin();
      named_label = true;
    }
  }

  bool has_header = named_label;
  if (!has_header) {
    double v;
    for (long c = 0; c < width; ++c)
      if (c != label_idx.value_or(-1) && !parse_number(rows.front()[c], v)) has_header = true;
  }
  const std::size_t first = has_header ? 1 : 0;
  if (rows.size() <= first) throw ParseError("csv: header but no data rows");

  const Index m = static_cast<Index>(rows.size() - first);
  const Index d = width - (label_idx ? 1 : 0);
  if (d < 1) throw ParseError("csv: no feature columns");

  MsscInstance inst;
  inst.A.resize(m, d);
  Labels labels;
  std::map<std::string, int> label_ids;
  for (Index i = 0; i < m; ++i) {
    const auto& cells = rows[first + i];
    Index col = 0;
    for (long c = 0; c < width; ++c) {
      if (label_idx && c == *label_idx) {
        if (cells[c].empty()) throw ParseError("csv: empty label", line_of[first + i], c + 1);
        const auto [it, inserted] =
            label_ids.emplace(cells[c], static_cast<int>(label_ids.size()));
        labels.push_back(it->second);
        continue;
      }
      double v;
      if (!parse_number(cells[c], v) || !std::isfinite(v))
        throw ParseError("csv: non-numeric cell '" + cells[c] + "'", line_of[first + i], c + 1);
      inst.A(i, col++) = v;
    }
  }

  if (standardize) {
    const Eigen::RowVectorXd mean = inst.A.colwise().mean();
    inst.A.rowwise() -= mean;
    for (Index c = 0; c < d; ++c) {
      const double sd = std::sqrt(inst.A.col(c).squaredNorm() / static_cast<double>(m));
      if (sd > 0.0) inst.A.col(c) /= sd;
    }
  }
  if (label_idx) {
    inst.k = static_cast<int>(label_ids.size());
    inst.labels = std::move(labels);
  }
  return inst;
}

inline MsscInstance load_csv(const std::string& path,
                             const std::optional<std::string>& label_column = {},
                             bool standardize = false) {
  std::ifstream in(path);
  if (!in) throw ParseError("csv: cannot open '" + path + "'");
  return load_csv(in, label_column, standardize);
}

}  // namespace lipal

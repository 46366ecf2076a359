// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipal/problem.hpp"

namespace lipal {

/// min 1/2 ||x - c||^2 + g(x)  s.t.  A x - b = 0.
class QuadraticToy final : public ProblemOracle {
 public:
  QuadraticToy(Vector c, Eigen::MatrixXd A, Vector b, ProxKind g = ZeroReg{})
      : c_(std::move(c)), A_(std::move(A)), b_(std::move(b)), g_(g) {
    if (A_.cols() != c_.size() || A_.rows() != b_.size())
      throw InvalidInput("QuadraticToy: inconsistent dimensions");
    validate(g_);
  }

  Index dim_primal() const override { return c_.size(); }
  Index dim_constraints() const override { return b_.size(); }
  double smooth_value(const Vector& x) const override { return 0.5 * (x - c_).squaredNorm(); }
  Vector smooth_grad(const Vector& x) const override { return x - c_; }
  Vector constraints(const Vector& x) const override { return A_ * x - b_; }
  Vector jac_apply(const Vector&, const Vector& d) const override { return A_ * d; }
  Vector jac_transpose_apply(const Vector&, const Vector& v) const override {
    return A_.transpose() * v;
  }
  ProxKind regularizer() const override { return g_; }

  const Vector& c() const { return c_; }
  const Eigen::MatrixXd& A() const { return A_; }
  const Vector& b() const { return b_; }

 private:
  Vector c_;
  Eigen::MatrixXd A_;
  Vector b_;
  ProxKind g_;
};

/// min 1/2 ||x - c||^2  s.t.  ||x||^2 - 1 = 0. A nonlinear constraint with
/// KKT pair x* = c / ||c||, y* = (||c|| - 1) / 2 for c != 0.
class CircleToy final : public ProblemOracle {
 public:
  explicit CircleToy(Vector c) : c_(std::move(c)) {}

  Index dim_primal() const override { return c_.size(); }
  Index dim_constraints() const override { return 1; }
  double smooth_value(const Vector& x) const override { return 0.5 * (x - c_).squaredNorm(); }
  Vector smooth_grad(const Vector& x) const override { return x - c_; }
  Vector constraints(const Vector& x) const override {
    return Vector::Constant(1, x.squaredNorm() - 1.0);
  }
  Vector jac_apply(const Vector& x, const Vector& d) const override {
    return Vector::Constant(1, 2.0 * x.dot(d));
  }
  Vector jac_transpose_apply(const Vector& x, const Vector& v) const override {
    return 2.0 * v[0] * x;
  }

 private:
  Vector c_;
};

/// A registered toy: oracle, start point and the closed-form KKT pair.
struct ToyProblem {
  std::string name;
  std::shared_ptr<const ProblemOracle> oracle;
  Vector x0;
  Vector y0;
  Vector x_star;
  Vector y_star;
};

/// KKT pair of min 1/2 ||x - c||^2 s.t. a^T x = b:
/// x* = c - a (a^T c - b) / ||a||^2,  y* = (a^T c - b) / ||a||^2.
inline std::pair<Vector, double> line_qp_kkt(const Vector& c, const Vector& a, double b) {
  const double y = (a.dot(c) - b) / a.squaredNorm();
  return {c - a * y, y};
}

inline std::vector<std::string> toy_names() {
  return {"qp-line", "qp-line-feasible", "qp-nonneg", "circle"};
}

/// Toys start at x0 = c, y0 = 0.
inline ToyProblem make_toy(const std::string& name) {
  auto vec2 = [](double a, double b) { return Vector((Vector(2) << a, b).finished()); };
  auto line_toy = [&](const std::string& toy, Vector c, Vector a, double b) {
    ToyProblem t;
    t.name = toy;
    Eigen::MatrixXd A = a.transpose();
    auto [xs, ys] = line_qp_kkt(c, a, b);
    t.oracle = std::make_shared<QuadraticToy>(c, A, Vector::Constant(1, b));
    t.x0 = c;
    t.y0 = Vector::Zero(1);
    t.x_star = xs;
    t.y_star = Vector::Constant(1, ys);
    return t;
  };
  if (name == "qp-line") return line_toy(name, vec2(1, 1), vec2(1, 0), 0.0);
  if (name == "qp-line-feasible") return line_toy(name, vec2(0, 1), vec2(1, 0), 0.0);
  if (name == "qp-nonneg") {
    // x >= 0 with x2 = 1 pins x* = (0, 1); the bound absorbs the pull of
    // c1 = -1, so the equality multiplier is 0.
    ToyProblem t;
    t.name = name;
    const Vector c = vec2(-1, 1);
    t.oracle = std::make_shared<QuadraticToy>(c, Eigen::MatrixXd(vec2(0, 1).transpose()),
                                              Vector::Constant(1, 1.0), nonneg_orthant());
    t.x0 = c.cwiseMax(0.0);
    t.y0 = Vector::Zero(1);
    t.x_star = vec2(0, 1);
    t.y_star = Vector::Zero(1);
    return t;
  }
  if (name == "circle") {
    ToyProblem t;
    t.name = name;
    const Vector c = vec2(2, 0);
    t.oracle = std::make_shared<CircleToy>(c);
    t.x0 = c;
    t.y0 = Vector::Zero(1);
    t.x_star = vec2(1, 0);
    t.y_star = Vector::Constant(1, 0.5);
    return t;
  }
  throw InvalidInput("unknown toy '" + name + "'");
}

}  // namespace lipal

// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

#include "lipal/mssc.hpp"
#include "support.hpp"

namespace lipal {
namespace {

using testing::vec;

MsscInstance instance(Eigen::MatrixXd A, int k, int r) {
  MsscInstance inst;
  inst.A = std::move(A);
  inst.k = k;
  inst.r = r;
  return inst;
}

Vector rows_to_x(const RowMajorMatrix& X) { return Eigen::Map<const Vector>(X.data(), X.size()); }

TEST(MsscOracle, IdentityData) {
  const MsscOracle o(instance(Eigen::MatrixXd::Identity(2, 2), 2, 2));
  const Vector x = rows_to_x(RowMajorMatrix::Identity(2, 2));
  EXPECT_EQ(o.smooth_value(x), 0.0);
  EXPECT_EQ(o.constraints(x), Vector::Zero(2));
}

TEST(MsscOracle, ScalarExpansion) {
  const double a = 1.7;
  const MsscOracle o(instance(Eigen::MatrixXd::Constant(1, 1, a), 1, 1));
  for (double x : {0.0, 0.3, -0.8, 2.0}) {
    EXPECT_NEAR(o.smooth_value(vec({x})), a * a * (1.0 - x * x), 1e-14);
    EXPECT_NEAR(o.smooth_grad(vec({x}))[0], -2.0 * a * a * x, 1e-14);
  }
}

// Dense reference: f = Tr(G) - sum_ij G_ij x_i^T x_j and F_i = x_i^T s - 1.
TEST(MsscOracle, AgreesWithDenseGramFormulas) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd A = testing::gaussian(9, 4, rng);
    const MsscOracle o(instance(A, 3, 5));
    const Vector x = testing::gaussian(45, rng, 0.4);
    const Eigen::MatrixXd G = A * A.transpose();
    Eigen::MatrixXd X(9, 5);
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 5; ++j) X(i, j) = x[i * 5 + j];
    double f = G.trace();
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 9; ++j) f -= G(i, j) * X.row(i).dot(X.row(j));
    EXPECT_NEAR(o.smooth_value(x), f, 1e-10 * (1.0 + std::abs(f)));
    // f + Tr(X^T G X) = Tr(G)
    EXPECT_NEAR(o.smooth_value(x) + (X.transpose() * G * X).trace(), G.trace(),
                1e-10 * G.trace());
    const Vector s = X.colwise().sum().transpose();
    for (Index i = 0; i < 9; ++i) {
      EXPECT_NEAR(o.constraints(x)[i], X.row(i).dot(s) - 1.0, 1e-12);
      EXPECT_NEAR(MsscOracle(instance(A, 3, 5), true).constraints(x)[i],
                  X.row(i).dot(s - Vector::Ones(5)), 1e-12);
    }
  }
}

TEST(MsscOracle, DerivativesAndAdjointness) {
  std::mt19937_64 rng(8);
  const MsscOracle o(instance(testing::gaussian(15, 3, rng), 3, 4));
  for (int i = 0; i < 20; ++i) {
    const Vector x = testing::gaussian(60, rng, 0.3);
    EXPECT_LE(gradient_check(o, x, rng), 1e-6);
    EXPECT_LE(jacobian_check(o, x, rng), 1e-6);
    EXPECT_LE(assert_adjoint(o, x, 5), 1e-10);
  }
}

TEST(MsscOracle, RegularizerIsTheScaledBall) {
  const MsscOracle o(instance(Eigen::MatrixXd::Identity(4, 2), 2, 4));
  const ProxKind kind = o.regularizer();
  const auto* ball = std::get_if<NonnegBallIndicator>(&kind);
  ASSERT_NE(ball, nullptr);
  EXPECT_DOUBLE_EQ(ball->radius, 2.0);
}

TEST(MsscInstance, ValidationErrors) {
  EXPECT_THROW(MsscOracle(instance(Eigen::MatrixXd::Identity(4, 2), 3, 2)), InvalidInput);
  EXPECT_THROW(MsscOracle(instance(Eigen::MatrixXd::Identity(2, 2), 3, 3)), InvalidInput);
  MsscInstance bad = instance(Eigen::MatrixXd::Identity(3, 2), 2, 2);
  bad.labels = Labels{0, 1};
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(MsscInstance, SidecarJson) {
  MsscInstance inst = instance(Eigen::MatrixXd::Zero(6, 3), 2, 4);
  inst.seed = 99;
  const auto j = sidecar_json(inst);
  EXPECT_EQ(j.at("m"), 6);
  EXPECT_EQ(j.at("d"), 3);
  EXPECT_EQ(j.at("k"), 2);
  EXPECT_EQ(j.at("r"), 4);
  EXPECT_EQ(j.at("seed"), 99);
}

TEST(FeasibleInit, Examples) {
  EXPECT_EQ(feasible_init(2, 2, {0, 1}), rows_to_x(RowMajorMatrix::Identity(2, 2)));
  const Vector x = feasible_init(3, 2, {0, 0, 1});
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(x, vec({h, 0.0, h, 0.0, 0.0, 1.0}));
  const MsscOracle o(instance(Eigen::MatrixXd::Identity(3, 3), 2, 2));
  EXPECT_LE(o.constraints(x).norm(), 1e-14);
}

TEST(FeasibleInit, BalancedRandomLabels) {
  std::mt19937_64 rng(10);
  const Labels labels = balanced_labels(50, 10, rng);
  const Vector x = feasible_init(50, 12, labels);
  const MsscOracle o(instance(testing::gaussian(50, 5, rng), 10, 12));
  EXPECT_LE(o.constraints(x).norm(), 1e-12);
  EXPECT_EQ(o.g_value(x), 0.0);
  EXPECT_NEAR(x.squaredNorm(), 10.0, 1e-12);
}

// Every set partition of {0..m-1} in restricted-growth form.
void for_each_partition(int m, const std::function<void(const Labels&)>& visit) {
  Labels a(m, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == m) {
      visit(a);
      return;
    }
    for (int c = 0; c <= used; ++c) {
      a[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
}

TEST(FeasibleInit, ExhaustiveOverSmallPartitions) {
  for (int m = 1; m <= 6; ++m) {
    int count = 0;
    for_each_partition(m, [&](const Labels& labels) {
      ++count;
      const int k = count_clusters(labels);
      const Vector x = feasible_init(m, 6, labels);
      const MsscOracle o(instance(Eigen::MatrixXd::Ones(m, 1), 1, 6));
      EXPECT_LE(o.constraints(x).norm(), 1e-12);
      EXPECT_NEAR(x.squaredNorm(), k, 1e-12);
      EXPECT_TRUE((x.array() >= 0.0).all());
    });
    // Bell numbers.
    const int bell[] = {1, 1, 2, 5, 15, 52, 203};
    EXPECT_EQ(count, bell[m]);
  }
}

TEST(FeasibleInit, Errors) {
  EXPECT_THROW(feasible_init(3, 2, {0, 2, 2}), InvalidInput);
  EXPECT_THROW(feasible_init(3, 2, {0, 1, 2}), InvalidInput);
  EXPECT_THROW(feasible_init(3, 2, {0, 1}), InvalidInput);
  EXPECT_THROW(feasible_init(2, 2, {0, -1}), InvalidInput);
}

TEST(SynthBalls, SingleCluster) {
  const SyntheticData d = synth_balls(30, 4, 1, 3.0, 5);
  for (Index i = 0; i < 30; ++i) {
    EXPECT_EQ(d.labels[i], 0);
    EXPECT_LE((d.A.row(i) - d.centers.row(0)).norm(), 1.0);
  }
}

TEST(SynthBalls, SeparatedClustersAndBalance) {
  const SyntheticData d = synth_balls(40, 3, 2, 3.0, 6);
  EXPECT_GE((d.centers.row(0) - d.centers.row(1)).norm(), 3.0);
  std::vector<int> sizes(2, 0);
  for (int l : d.labels) ++sizes[l];
  EXPECT_LE(std::abs(sizes[0] - sizes[1]), 1);
  for (Index i = 0; i < 40; ++i)
    for (Index j = 0; j < 40; ++j)
      if (d.labels[i] != d.labels[j]) {
        EXPECT_GE((d.A.row(i) - d.A.row(j)).norm(), 1.0);
      }
}

TEST(SynthBalls, DeterministicPerSeed) {
  const SyntheticData a = synth_balls(50, 30, 10, 3.0, 1);
  const SyntheticData b = synth_balls(50, 30, 10, 3.0, 1);
  const SyntheticData c = synth_balls(50, 30, 10, 3.0, 2);
  EXPECT_TRUE(a.A == b.A);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_FALSE(a.A == c.A);
}

TEST(SynthBalls, Errors) {
  EXPECT_THROW(synth_balls(10, 2, 3, 2.0, 1), InvalidInput);
  EXPECT_THROW(synth_balls(2, 2, 3, 3.0, 1), InvalidInput);
}

TEST(ExtractLabels, Examples) {
  EXPECT_EQ(extract_labels(rows_to_x(RowMajorMatrix::Identity(2, 2)), 2, 2), (Labels{0, 1}));
  // Ties go to the lowest column; near-zero columns are dropped.
  RowMajorMatrix X(3, 3);
  X << 0.5, 0.5, 0.0, 1e-8, 0.0, 0.9, 0.0, 0.0, 0.3;
  EXPECT_EQ(extract_labels(rows_to_x(X), 3, 3), (Labels{0, 2, 2}));
  X.col(1).setConstant(5e-7);
  EXPECT_EQ(extract_labels(rows_to_x(X), 3, 3), (Labels{0, 1, 1}));
  EXPECT_THROW(extract_labels(Vector::Zero(4), 2, 2), InvalidInput);
  EXPECT_THROW(extract_labels(Vector::Zero(5), 2, 2), InvalidInput);
}

TEST(ExtractLabels, InvertsFeasibleInit) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Labels labels = balanced_labels(20, 4, rng);
    const Labels back = extract_labels(feasible_init(20, 6, labels), 20, 6);
    EXPECT_DOUBLE_EQ(adjusted_rand_index(labels, back), 1.0);
  }
}

// Brute-force ARI from the pair counts, independent of the contingency-table
// formula: index = agreeing pairs in both, expected from marginal pair counts.
double brute_ari(const Labels& a, const Labels& b) {
  double both = 0, in_a = 0, in_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      both += sa && sb;
      in_a += sa;
      in_b += sb;
      pairs += 1;
    }
  const double expected = in_a * in_b / pairs;
  return (both - expected) / (0.5 * (in_a + in_b) - expected);
}

TEST(AdjustedRandIndex, Examples) {
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 1, 2, 0}, {0, 1, 2, 0}), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}), -0.5);
  EXPECT_DOUBLE_EQ(brute_ari({0, 0, 1, 1}, {0, 1, 0, 1}), -0.5);
  EXPECT_THROW(adjusted_rand_index({0, 1}, {0}), InvalidInput);
}

TEST(AdjustedRandIndex, MatchesPairCountingOnRandomLabelings) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> lab(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    Labels a(15), b(15);
    for (int i = 0; i < 15; ++i) {
      a[i] = lab(rng);
      b[i] = lab(rng);
    }
    EXPECT_NEAR(adjusted_rand_index(a, b), brute_ari(a, b), 1e-12);
  }
}

TEST(MergeToK, MergesClosestClustersFirst) {
  // Four tight groups on a line at 0, 1, 10, 11; merging to two joins the
  // neighbours.
  Eigen::MatrixXd A(8, 1);
  A << 0.0, 0.1, 1.0, 1.1, 10.0, 10.1, 11.0, 11.1;
  const Labels merged = merge_to_k(A, {0, 0, 1, 1, 2, 2, 3, 3}, 2);
  EXPECT_EQ(merged, (Labels{0, 0, 0, 0, 1, 1, 1, 1}));
  EXPECT_EQ(merge_to_k(A, {0, 0, 1, 1, 0, 0, 1, 1}, 3), (Labels{0, 0, 1, 1, 0, 0, 1, 1}));
}

TEST(MergeToK, AcceptsLabelGapsFromPrunedArgmax) {
  // Column 1 survives pruning but wins no row.
  RowMajorMatrix X(3, 3);
  X << 0.5, 0.5, 0.0, 1e-8, 0.0, 0.9, 0.0, 0.0, 0.3;
  const Labels raw = extract_labels(rows_to_x(X), 3, 3);
  ASSERT_EQ(raw, (Labels{0, 2, 2}));
  Eigen::MatrixXd A(3, 1);
  A << 0.0, 5.0, 5.1;
  EXPECT_EQ(merge_to_k(A, raw, 2), (Labels{0, 1, 1}));
  EXPECT_EQ(merge_to_k(A, raw, 1), (Labels{0, 0, 0}));
  EXPECT_EQ(compact_labels({4, 9, 4, 7}), (Labels{0, 2, 0, 1}));
  EXPECT_THROW(compact_labels({0, -1}), InvalidInput);
}

TEST(LoadCsv, IdentityMatrix) {
  std::istringstream in("1,0\n0,1");
  const MsscInstance inst = load_csv(in);
  EXPECT_TRUE(inst.A == Eigen::MatrixXd::Identity(2, 2));
  EXPECT_FALSE(inst.labels);
}

TEST(LoadCsv, LabelColumnByIndexAndName) {
  std::istringstream plain("1.5,2,a\n3,4,b\n5,6,a\n");
  const MsscInstance byidx = load_csv(plain, std::string("-1"));
  ASSERT_TRUE(byidx.labels);
  EXPECT_EQ(*byidx.labels, (Labels{0, 1, 0}));
  EXPECT_EQ(byidx.k, 2);
  EXPECT_EQ(byidx.A.cols(), 2);
  EXPECT_EQ(byidx.A(0, 0), 1.5);

  std::istringstream named("x,class,y\n1,7,2\n3,8,4\n");
  const MsscInstance byname = load_csv(named, std::string("class"));
  EXPECT_EQ(*byname.labels, (Labels{0, 1}));
  EXPECT_EQ(byname.A, (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished());
}

TEST(LoadCsv, HeaderDetectionAndStandardisation) {
  std::istringstream in("u,v\n1,10\n3,30\n");
  const MsscInstance inst = load_csv(in, std::nullopt, true);
  EXPECT_EQ(inst.A.rows(), 2);
  EXPECT_NEAR(inst.A.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(inst.A.col(1).squaredNorm() / 2.0, 1.0, 1e-15);
}

TEST(LoadCsv, ErrorsCarryLocation) {
  std::istringstream empty("");
  EXPECT_THROW(load_csv(empty), ParseError);
  std::istringstream ragged("1,2\n3\n");
  try {
    load_csv(ragged);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2);
  }
  std::istringstream text("1,2\n3,oops\n");
  try {
    load_csv(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 2);
  }
  std::istringstream missing("a,b\n1,2\n");
  EXPECT_THROW(load_csv(missing, std::string("c")), InvalidInput);
  EXPECT_THROW(load_csv(std::string("/nonexistent/points.csv")), ParseError);
}

}  // namespace
}  // namespace lipal

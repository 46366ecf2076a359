// SPDX-License-Identifier: Apache-2.0
//
// lipal: toy problems, clustering runs and benchmark sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lipal/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNumerical = 70;

struct Options {
  lipal::SolverConfig config;
  std::string variant = "lipal";
  std::string out;
  std::string trace;
  std::string toy;
  std::string bench_spec;
  lipal::ClusterSource source;
  std::string input;
  std::string labels;
};

void add_solver_flags(CLI::App& app, Options& o) {
  auto& c = o.config;
  app.add_option("--tau", c.tau, "perturbation weight in (0, 1]")->capture_default_str();
  app.add_option("--rho", c.rho, "penalty parameter")->capture_default_str();
  app.add_option("--beta0", c.beta0, "initial proximal weight")->capture_default_str();
  app.add_option("--eps-stat", c.eps_stat, "stationarity tolerance")->capture_default_str();
  app.add_option("--eps-feas", c.eps_feas, "feasibility tolerance")->capture_default_str();
  app.add_option("--eps-sub", c.eps_sub, "inner solver tolerance")->capture_default_str();
  app.add_option("--max-outer", c.max_outer, "outer iteration limit")->capture_default_str();
  app.add_option("--max-inner", c.max_inner, "inner iteration limit")->capture_default_str();
  app.add_option("--delta1", c.delta1, "adaptive rho growth factor")->capture_default_str();
  app.add_option("--delta2", c.delta2, "adaptive tau decay factor")->capture_default_str();
  app.add_option("--max-stages", c.max_stages, "adaptive stage limit")->capture_default_str();
  app.add_option("--seed", c.seed, "seed of the random initial labeling")->capture_default_str();
  app.add_option("--variant", o.variant, "lipal | alms | adaptive")
      ->check(CLI::IsMember({"lipal", "alms", "adaptive"}))
      ->capture_default_str();
  app.add_option("--out", o.out, "write the JSON report (or bench CSV) here");
}

void add_cluster_flags(CLI::App& app, Options& o) {
  auto& s = o.source;
  app.add_option("--m", s.m, "synthetic: number of points")->capture_default_str();
  app.add_option("--d", s.d, "synthetic: dimension")->capture_default_str();
  app.add_option("--k", s.k, "number of clusters")->capture_default_str();
  app.add_option("--r", s.r, "factorization rank (default k + 2)");
  app.add_option("--sep", s.sep, "synthetic: minimum center separation")->capture_default_str();
  app.add_option("--data-seed", s.data_seed, "synthetic: data seed")->capture_default_str();
  app.add_option("--input", o.input, "CSV file of points (one per row)");
  app.add_option("--labels", o.labels, "label column of the CSV (index or header name)");
  app.add_flag("--standardize", s.standardize, "standardize CSV features");
  app.add_flag("--shifted-F", s.shifted_F, "use F_i = x_i^T (sum_j x_j - 1_r) as the constraint");
  app.add_option("--trace", o.trace, "write the per-iteration trace CSV here");
}

void emit(const lipal::RunReport& report, const Options& o) {
  lipal::RunReport r = report;
  if (!o.trace.empty()) {
    lipal::write_trace(r.trace, o.trace);
    r.trace_path = o.trace;
  }
  const std::string text = lipal::to_json(r).dump(2);
  if (o.out.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(o.out);
    if (!out) throw lipal::Error("cannot open '" + o.out + "' for writing");
    out << text << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbed augmented Lagrangian solver: toys, clustering and benchmarks"};
  app.require_subcommand(1);
  Options o;

  CLI::App* toy = app.add_subcommand("toy", "solve a registered toy problem");
  toy->add_option("name", o.toy, "qp-line | qp-line-feasible | qp-nonneg | circle")->required();
  add_solver_flags(*toy, o);
  toy->add_option("--trace", o.trace, "write the per-iteration trace CSV here");

  CLI::App* cluster = app.add_subcommand("cluster", "k-means clustering via the low-rank relaxation");
  add_solver_flags(*cluster, o);
  add_cluster_flags(*cluster, o);

  CLI::App* bench = app.add_subcommand("bench", "run a JSON sweep of instances x configs");
  bench->add_option("spec", o.bench_spec, "bench spec (JSON)")->required()->check(CLI::ExistingFile);
  add_solver_flags(*bench, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*bench) {
      std::ifstream spec(o.bench_spec);
      if (!spec) throw lipal::ParseError("cannot open '" + o.bench_spec + "'");
      const std::string base = std::filesystem::path(o.bench_spec).parent_path().string();
      if (o.out.empty()) {
        lipal::cmd_bench(spec, std::cout, o.config, base);
      } else {
        std::ofstream csv(o.out);
        if (!csv) throw lipal::Error("cannot open '" + o.out + "' for writing");
        lipal::cmd_bench(spec, csv, o.config, base);
      }
      return kExitOk;
    }

    const lipal::RunSettings settings = lipal::settings_for_variant(o.variant, o.config);
    lipal::RunReport report;
    if (*toy) {
      report = lipal::cmd_toy(o.toy, settings);
    } else {
      if (!o.input.empty()) o.source.input = o.input;
      if (!o.labels.empty()) o.source.label_column = o.labels;
      report = lipal::cmd_cluster(o.source, settings);
    }
    emit(report, o);
    return report.converged ? kExitOk : kExitNotConverged;
  } catch (const lipal::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lipal::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const lipal::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const lipal::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lipal/adaptive.hpp"
#include "lipal/core.hpp"
#include "lipal/mssc.hpp"
#include "lipal/toys.hpp"

namespace lipal {

/// How the outer loop is driven: plain LIPAL or the staged penalty schedule.
enum class Driver { single, adaptive };

struct RunSettings {
  SolverConfig config;
  Driver driver = Driver::single;
};

/// Maps the user-facing variant names: lipal (prox-linear inner solve),
/// alms (single prox-gradient step per iteration), adaptive (staged lipal).
inline RunSettings settings_for_variant(const std::string& name, SolverConfig config) {
  RunSettings s;
  if (name == "lipal") {
    config.variant = Variant::gauss_newton;
  } else if (name == "alms") {
    config.variant = Variant::prox_gradient;
  } else if (name == "adaptive") {
    config.variant = Variant::gauss_newton;
    s.driver = Driver::adaptive;
  } else {
    throw InvalidInput("unknown variant '" + name + "' (expected lipal, alms or adaptive)");
  }
  s.config = config;
  return s;
}

inline std::string variant_label(const RunSettings& s) {
  if (s.driver == Driver::adaptive) return "adaptive";
  return s.config.variant == Variant::gauss_newton ? "lipal" : "alms";
}

inline RunReport run_with(const ProblemOracle& oracle, const Vector& x0, const Vector& y0,
                          const RunSettings& s) {
  return s.driver == Driver::adaptive ? run_adaptive(oracle, x0, y0, s.config)
                                      : run_lipal(oracle, x0, y0, s.config);
}

namespace detail {
struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  Fnv1a& add(const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // field separator
    h *= 0x100000001b3ULL;
    return *this;
  }
  Fnv1a& add(double v) { return add(fmt17(v)); }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};
}  // namespace detail

/// Where a clustering instance comes from: a CSV file or the synthetic balls.
struct ClusterSource {
  std::optional<std::string> input;
  std::optional<std::string> label_column;
  bool standardize = false;
  Index m = 50;
  Index d = 30;
  int k = 10;
  /// 0 selects k + 2.
  int r = 0;
  double sep = 3.0;
  std::uint64_t data_seed = 1;
  bool shifted_F = false;
};

/// Builds the instance and an identifier that depends only on the data.
inline std::pair<MsscInstance, std::string> build_instance(const ClusterSource& src) {
  MsscInstance inst;
  detail::Fnv1a id;
  std::string prefix;
  if (src.input) {
    std::ifstream in(*src.input, std::ios::binary);
    if (!in) throw ParseError("csv: cannot open '" + *src.input + "'");
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream text(content);
    inst = load_csv(text, src.label_column, src.standardize);
    if (!inst.labels) inst.k = src.k;
    id.add(content).add(src.label_column.value_or("")).add(src.standardize ? "std" : "raw");
    prefix = "csv-";
  } else {
    SyntheticData data = synth_balls(src.m, src.d, src.k, src.sep, src.data_seed);
    inst.A = std::move(data.A);
    inst.labels = std::move(data.labels);
    inst.k = src.k;
    inst.seed = src.data_seed;
    id.add(static_cast<double>(src.m)).add(static_cast<double>(src.d)).add(src.k).add(src.sep)
        .add(std::to_string(src.data_seed));
    prefix = "synth-";
  }
  inst.r = src.r > 0 ? src.r : inst.k + 2;
  inst.validate();
  id.add(inst.r).add(src.shifted_F ? "shiftedF" : "F");
  return {std::move(inst), prefix + id.hex()};
}

/// Runs a registered toy and records the distance to its KKT pair.
inline RunReport cmd_toy(const std::string& name, const RunSettings& settings) {
  const ToyProblem toy = make_toy(name);
  RunReport report = run_with(*toy.oracle, toy.x0, toy.y0, settings);
  report.instance = "toy-" + name;
  report.x_error = (report.x - toy.x_star).norm();
  report.y_error = (report.y - toy.y_star).norm();
  return report;
}

/// Clustering run from a feasible start built on a seeded balanced labeling
/// into r groups, so every column of X starts active. The recovered labels
/// are merged down to k clusters before scoring.
inline RunReport cmd_cluster(const ClusterSource& src, const RunSettings& settings) {
  auto [inst, id] = build_instance(src);
  std::mt19937_64 rng(settings.config.seed);
  const Labels start = balanced_labels(inst.m(), std::min<Index>(inst.r, inst.m()), rng);
  const Vector x0 = feasible_init(inst.m(), inst.r, start);
  const Vector y0 = Vector::Zero(inst.m());
  const MsscOracle oracle(inst, src.shifted_F);
  RunReport report = run_with(oracle, x0, y0, settings);
  report.instance = id;
  if (inst.labels) {
    const Labels found = merge_to_k(inst.A, extract_labels(report.x, inst.m(), inst.r), inst.k);
    report.ari = adjusted_rand_index(found, *inst.labels);
  }
  return report;
}

inline constexpr const char* kBenchHeader =
    "instance,tau,rho,variant,iters,ms,f,feas,stat,ari,seed,status";

namespace detail {
inline SolverConfig apply_config_json(SolverConfig c, const nlohmann::json& j) {
  auto num = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  num("tau", c.tau);
  num("rho", c.rho);
  num("beta0", c.beta0);
  num("eps_stat", c.eps_stat);
  num("eps_feas", c.eps_feas);
  num("eps_sub", c.eps_sub);
  num("max_outer", c.max_outer);
  num("max_inner", c.max_inner);
  num("delta1", c.delta1);
  num("delta2", c.delta2);
  num("max_stages", c.max_stages);
  num("seed", c.seed);
  num("c0", c.c0);
  c.record_trace = false;
  return c;
}

inline ClusterSource source_from_json(const nlohmann::json& j, const std::string& base_dir) {
  ClusterSource src;
  const std::string type = j.value("type", "synthetic");
  if (type == "csv") {
    std::string path = j.at("path").get<std::string>();
    if (!path.empty() && path.front() != '/' && !base_dir.empty()) path = base_dir + "/" + path;
    src.input = path;
    if (j.contains("labels")) src.label_column = j.at("labels").get<std::string>();
    src.standardize = j.value("standardize", false);
  } else if (type != "synthetic") {
    throw InvalidInput("bench: unknown instance type '" + type + "'");
  }
  src.m = j.value("m", src.m);
  src.d = j.value("d", src.d);
  src.k = j.value("k", src.k);
  src.r = j.value("r", src.r);
  src.sep = j.value("sep", src.sep);
  src.data_seed = j.value("data_seed", src.data_seed);
  src.shifted_F = j.value("shifted_F", false);
  return src;
}
}  // namespace detail

/// Runs every instance x config cell of a JSON bench spec and writes one CSV
/// row per cell. A failing cell is recorded in its status column; only a
/// malformed spec throws.
///
/// Spec layout:
///   {"instances": [{"type": "toy", "name": "qp-line"},
///                  {"type": "synthetic", "m": 50, "d": 30, "k": 10, "sep": 3},
///                  {"type": "csv", "path": "data.csv", "labels": "class"}],
///    "configs":   [{"tau": 1e-5, "rho": 10, "variant": "lipal", "seed": 1}]}
inline int cmd_bench(std::istream& spec_in, std::ostream& csv, const SolverConfig& defaults = {},
                     const std::string& base_dir = "") {
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(spec_in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("bench spec: ") + e.what());
  }
  if (!spec.is_object()) throw ParseError("bench spec: top level must be an object");
  const nlohmann::json instances = spec.value("instances", nlohmann::json::array());
  const nlohmann::json configs = spec.value("configs", nlohmann::json::array());
  if (!instances.is_array() || !configs.is_array())
    throw ParseError("bench spec: 'instances' and 'configs' must be arrays");

  csv << kBenchHeader << '\n';
  int rows = 0;
  for (const auto& inst : instances) {
    for (const auto& cfg : configs) {
      RunSettings settings;
      std::string instance_id = "?";
      std::string status;
      RunReport report;
      try {
        settings = settings_for_variant(cfg.value("variant", "lipal"),
                                        detail::apply_config_json(defaults, cfg));
        if (inst.value("type", "synthetic") == "toy") {
          instance_id = "toy-" + inst.at("name").get<std::string>();
          report = cmd_toy(inst.at("name").get<std::string>(), settings);
        } else {
          const ClusterSource src = detail::source_from_json(inst, base_dir);
          instance_id = build_instance(src).second;
          report = cmd_cluster(src, settings);
        }
        status = report.status;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bench spec: ") + e.what());
      } catch (const std::exception& e) {
        status = std::string("error: ") + e.what();
        for (char& ch : status)
          if (ch == ',' || ch == '\n') ch = ';';
      }
      using detail::fmt17;
      const bool ran = status.rfind("error", 0) != 0;
      csv << instance_id << ',' << fmt17(settings.config.tau) << ',' << fmt17(settings.config.rho)
          << ',' << variant_label(settings) << ',';
      if (ran) {
        csv << report.outer_iterations << ',' << fmt17(report.ms) << ',' << fmt17(report.f) << ','
            << fmt17(report.feasibility) << ',' << fmt17(report.stationarity) << ','
            << (report.ari ? fmt17(*report.ari) : std::string());
      } else {
        csv << ",,,,,";
      }
      csv << ',' << settings.config.seed << ',' << status << '\n';
      ++rows;
    }
  }
  return rows;
}

}  // namespace lipal

// Copyright 2026 The DCD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: generate, detect, evaluate, scenario.
//
// Failures exit with status 1 and print a single line
//   error=<Code> message=<text>
// to stderr. Usage errors use code UsageError and exit status 2.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dcd/experiments.hpp"

namespace {

using dcd::Error;
using dcd::ErrorCode;
namespace fs = std::filesystem;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string engine;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "flat key=value config file");
  cmd->add_option("--seed", flags.seed, "master seed (u64)");
  cmd->add_option("--engine", flags.engine, "sequential | parallel")
      ->check(CLI::IsMember({"sequential", "parallel"}));
  cmd->add_option("--out", flags.out, "output directory");
}

dcd::Manifest config_entries(const CommonFlags& flags) {
  if (flags.config.empty()) return {};
  return dcd::read_manifest(flags.config);
}

void set(dcd::Manifest& m, const std::string& key, const std::string& value) {
  for (auto& [k, v] : m) {
    if (k == key) {
      v = value;
      return;
    }
  }
  m.emplace_back(key, value);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// --- generate ---------------------------------------------------------------

struct GenerateFlags {
  CommonFlags common;
  std::optional<long long> num_nodes;
  std::optional<int> num_blocks;
  std::optional<double> nu, lambda;
};

int run_generate(const GenerateFlags& f) {
  dcd::Manifest m = config_entries(f.common);
  if (f.num_nodes) set(m, "N", std::to_string(*f.num_nodes));
  if (f.num_blocks) set(m, "K", std::to_string(*f.num_blocks));
  if (f.nu) set(m, "nu", fmt(*f.nu));
  if (f.lambda) set(m, "lambda", fmt(*f.lambda));
  if (f.common.seed) set(m, "seed", std::to_string(*f.common.seed));
  const auto get = [&](const char* key, const char* fallback) {
    return dcd::manifest_get(m, key, fallback);
  };
  const dcd::Index n = std::stoll(get("N", "2000"));
  const int k = std::stoi(get("K", "3"));
  const double nu = std::stod(get("nu", "0.2"));
  const double lambda = std::stod(get("lambda", "0.5"));
  const std::uint64_t seed = std::stoull(get("seed", "1"));
  const fs::path out = f.common.out.empty() ? fs::path(get("out", "sbm")) : fs::path(f.common.out);

  const dcd::SbmSample sample = dcd::sample_sbm(dcd::balanced_sbm(n, k, nu, lambda), seed);
  fs::create_directories(out);
  dcd::save_edge_list(sample.graph, out / "graph.txt");
  dcd::save_labels(sample.truth.labels, out / "labels.csv");
  dcd::write_manifest({{"N", std::to_string(n)},
                       {"K", std::to_string(k)},
                       {"nu", fmt(nu)},
                       {"lambda", fmt(lambda)},
                       {"seed", std::to_string(seed)},
                       {"edges", std::to_string(sample.graph.num_edges())}},
                      out / "manifest.txt");
  std::cout << "nodes=" << n << " edges=" << sample.graph.num_edges() << " out=" << out.string()
            << '\n';
  return 0;
}

// --- detect -----------------------------------------------------------------

struct DetectFlags {
  CommonFlags common;
  std::string graph, labels, base;
  std::optional<int> num_blocks, workers;
  std::optional<long long> pilots;
  std::optional<double> ratio, alpha;
  std::string policy;
  bool lee = false;
};

int run_detect(const DetectFlags& f) {
  dcd::Manifest m = config_entries(f.common);
  if (!f.graph.empty()) set(m, "graph", f.graph);
  if (!f.labels.empty()) set(m, "labels", f.labels);
  if (!f.base.empty()) set(m, "base", f.base);
  if (f.num_blocks) set(m, "K", std::to_string(*f.num_blocks));
  if (f.workers) set(m, "M", std::to_string(*f.workers));
  if (f.pilots) set(m, "l", std::to_string(*f.pilots));
  if (f.ratio) set(m, "r", fmt(*f.ratio));
  if (f.alpha) set(m, "alpha", fmt(*f.alpha));
  if (!f.policy.empty()) set(m, "policy", f.policy);
  if (!f.common.engine.empty()) set(m, "engine", f.common.engine);
  if (f.common.seed) set(m, "seed", std::to_string(*f.common.seed));
  if (f.lee) set(m, "lee", "true");

  const std::string graph_path = dcd::manifest_get(m, "graph");
  if (graph_path.empty()) throw Error(ErrorCode::kInvalidArgument, "detect needs --graph");
  const dcd::IdBase base = dcd::parse_id_base(dcd::manifest_get(m, "base", "0"));
  const dcd::LoadedGraph loaded = dcd::load_edge_list(graph_path, base);
  std::optional<dcd::LoadedLabels> labels;
  if (const auto p = dcd::manifest_get(m, "labels"); !p.empty()) {
    labels = dcd::load_labels(p, loaded.id_map);
  }

  dcd::DetectConfig config = dcd::DetectConfig::from_manifest(m);
  if (config.num_pilots <= 0 && config.pilot_ratio <= 0) config.pilot_ratio = 0.2;
  if (!labels && config.policy == dcd::PilotPolicy::kStratified) {
    config.policy = dcd::PilotPolicy::kUniform;  // no labels to stratify by
  }
  const dcd::GroundTruth* truth = labels ? &labels->truth : nullptr;
  const dcd::DetectRun run = dcd::detect(loaded.graph, truth, config);
  const dcd::EvalReport report = dcd::evaluate(loaded.graph, run.result, run.plan, truth, nullptr);

  dcd::Manifest record = config.to_manifest();
  record.insert(record.begin(), {"graph", graph_path});
  if (labels) record.insert(record.begin() + 1, {"labels", dcd::manifest_get(m, "labels")});
  record.emplace_back("base", base == dcd::IdBase::kOne ? "1" : "0");
  record.emplace_back("input.duplicate_edges", std::to_string(loaded.duplicate_edges));
  record.emplace_back("input.self_loops_dropped", std::to_string(loaded.self_loops_dropped));
  const fs::path out = f.common.out.empty() ? fs::path(dcd::manifest_get(m, "out", "detect_out"))
                                            : fs::path(f.common.out);
  dcd::save_result(run.result, report, record, out, &loaded.id_map);

  std::cout << "nodes=" << loaded.graph.num_nodes() << " pilots=" << run.result.pilot_indices.size()
            << " workers=" << run.plan.num_workers();
  if (truth) std::cout << " misclustering_rate=" << fmt(report.misclustering_rate);
  if (report.red) std::cout << " red=" << fmt(*report.red);
  std::cout << " out=" << out.string() << '\n';
  for (const auto& w : run.result.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateFlags {
  std::string graph, labels, result, base = "0";
};

int run_evaluate(const EvaluateFlags& f) {
  const dcd::LoadedGraph loaded = dcd::load_edge_list(f.graph, dcd::parse_id_base(f.base));
  const dcd::LoadedLabels estimated = dcd::load_labels(f.result, loaded.id_map);
  std::cout << "nodes=" << loaded.graph.num_nodes()
            << " clusters=" << estimated.truth.num_blocks;
  try {
    std::cout << " red=" << fmt(dcd::relative_density(loaded.graph, estimated.truth.labels));
  } catch (const Error&) {
    std::cout << " red=";
  }
  if (!f.labels.empty()) {
    const dcd::LoadedLabels truth = dcd::load_labels(f.labels, loaded.id_map);
    const int k = std::max(truth.truth.num_blocks, estimated.truth.num_blocks);
    std::cout << " misclustering_rate="
              << fmt(dcd::misclustering_rate(estimated.truth.labels, truth.truth.labels, k).rate);
  }
  std::cout << '\n';
  return 0;
}

// --- scenario ---------------------------------------------------------------

int run_scenario_cmd(const CommonFlags& f) {
  if (f.config.empty()) throw Error(ErrorCode::kInvalidArgument, "scenario needs --config");
  dcd::Manifest m = config_entries(f);
  if (f.seed) set(m, "seed", std::to_string(*f.seed));
  if (!f.engine.empty()) set(m, "engine", f.engine);
  if (!f.out.empty()) set(m, "out", f.out);
  const dcd::ExperimentConfig config = dcd::parse_experiment_config(m);
  const dcd::ScenarioResult result = dcd::run_scenario(config);
  dcd::write_scenario(result);
  dcd::write_manifest(m, config.out / "manifest.txt");
  int failed = 0;
  for (const auto& p : result.points) failed += !p.ok;
  std::cout << "scenario=" << dcd::to_string(config.scenario) << " points=" << result.points.size()
            << " failed=" << failed << " out=" << config.out.string() << '\n';
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::string flat = message;
  for (char& c : flat) {
    if (c == '\n') c = ' ';
  }
  std::cerr << "error=" << code << " message=" << flat << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed spectral community detection"};
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "sample a balanced SBM graph");
  add_common(generate, gen.common);
  generate->add_option("--N", gen.num_nodes, "number of nodes");
  generate->add_option("--K", gen.num_blocks, "number of blocks");
  generate->add_option("--nu", gen.nu, "connectivity scale");
  generate->add_option("--lambda", gen.lambda, "within/between contrast");

  DetectFlags det;
  auto* detect = app.add_subcommand("detect", "run distributed detection on an edge list");
  add_common(detect, det.common);
  detect->add_option("--graph", det.graph, "edge-list file");
  detect->add_option("--labels", det.labels, "ground-truth labels (optional)");
  detect->add_option("--base", det.base, "node id base, 0 or 1");
  detect->add_option("--K", det.num_blocks, "number of communities");
  detect->add_option("--M", det.workers, "number of workers");
  detect->add_option("--l", det.pilots, "number of pilot nodes");
  detect->add_option("--r", det.ratio, "pilot ratio l/N (used when --l is absent)");
  detect->add_option("--alpha", det.alpha, "unbalanced partition strength (needs labels)");
  detect->add_option("--policy", det.policy, "stratified | uniform");
  detect->add_flag("--lee", det.lee, "retain worker singular vectors");

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "score a labels file");
  evaluate->add_option("--graph", ev.graph, "edge-list file")->required();
  evaluate->add_option("--result", ev.result, "estimated labels (node,label)")->required();
  evaluate->add_option("--labels", ev.labels, "ground-truth labels");
  evaluate->add_option("--base", ev.base, "node id base, 0 or 1");

  CommonFlags scen;
  auto* scenario = app.add_subcommand("scenario", "run an experiment grid from a config file");
  add_common(scenario, scen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*detect) return run_detect(det);
    if (*evaluate) return run_evaluate(ev);
    return run_scenario_cmd(scen);
  } catch (const Error& e) {
    print_error(dcd::to_string(e.code()), e.what());
  } catch (const std::invalid_argument& e) {
    print_error("ParseError", e.what());
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
  }
  return 1;
}

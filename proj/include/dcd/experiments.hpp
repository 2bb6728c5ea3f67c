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

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dcd/common.hpp"
#include "dcd/graph_io.hpp"
#include "dcd/metrics.hpp"
#include "dcd/protocol.hpp"

namespace dcd {

// ---------------------------------------------------------------------------
// Single detection runs

/// One DCD configuration. Child seeds: pilots derive_seed(seed, 2), plan
/// derive_seed(seed, 3), master k-means derive_seed(seed, 4).
struct DetectConfig {
  int num_blocks = 3;
  Index num_pilots = 0;   // used when > 0
  double pilot_ratio = 0; // otherwise l = round(ratio * N)
  int num_workers = 1;
  PilotPolicy policy = PilotPolicy::kStratified;
  std::optional<double> unbalance;  // proportions mode with this alpha
  Engine engine = Engine::kSequential;
  std::uint64_t seed = 1;
  bool retain_left_singular = false;

  Index pilots_for(Index num_nodes) const;
  Manifest to_manifest() const;
  static DetectConfig from_manifest(const Manifest& manifest);
};

struct DetectRun {
  PartitionPlan plan;
  ClusteringResult result;
};

DetectRun detect(const SparseGraph& graph, const GroundTruth* truth, const DetectConfig& config);

// ---------------------------------------------------------------------------
// Scenario harness

enum class Scenario { kPilotSweep, kSignalSweep, kUnbalanceSweep, kScCompare, kFileRun };

const char* to_string(Scenario scenario);
Scenario parse_scenario(const std::string& name);

/// Every list-valued field is a grid axis; the grid is their Cartesian
/// product in the order N, K, nu, lambda, pilots, M, alpha.
struct ExperimentConfig {
  Scenario scenario = Scenario::kPilotSweep;
  std::vector<Index> num_nodes{2000};
  std::vector<int> num_blocks{3};
  std::vector<double> nu{0.2};
  std::vector<double> lambda{0.5};
  std::vector<double> pilot_ratio;  // r = l / N; ignored when pilots is set
  std::vector<Index> pilots;
  std::vector<int> workers{5};
  std::vector<double> alpha{0.0};
  int repetitions = 20;
  std::uint64_t seed = 1;
  Engine engine = Engine::kSequential;
  PilotPolicy policy = PilotPolicy::kStratified;
  bool compute_lee = false;
  bool run_sc = false;  // implied by sc_compare
  std::filesystem::path out = "results";
  // file_run inputs
  std::filesystem::path graph_path;
  std::filesystem::path labels_path;
  IdBase id_base = IdBase::kZero;

  void validate() const;
};

/// Flat key=value text. Keys: scenario, N, K, nu, lambda, r, l, M, alpha, R,
/// seed, engine, policy, lee, sc, out, graph, labels, base. Lists are
/// comma-separated.
ExperimentConfig parse_experiment_config(const Manifest& entries);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct GridPoint {
  Index num_nodes = 0;
  int num_blocks = 0;
  double nu = 0;
  double lambda = 0;
  Index pilots = 0;
  double pilot_ratio = 0;
  int workers = 1;
  double alpha = 0;
};

struct RepetitionOutcome {
  int repetition = 0;
  std::uint64_t seed = 0;
  double rate = std::numeric_limits<double>::quiet_NaN();
  double lee = std::numeric_limits<double>::quiet_NaN();
  double red = std::numeric_limits<double>::quiet_NaN();
  double max_alpha = std::numeric_limits<double>::quiet_NaN();
  double sc_rate = std::numeric_limits<double>::quiet_NaN();
  // timings (not part of the deterministic tables)
  double master_seconds = 0;
  double worker_seconds = 0;
  double compute_seconds = 0;
  double sc_seconds = std::numeric_limits<double>::quiet_NaN();
};

struct Summary {
  double median = std::numeric_limits<double>::quiet_NaN();
  double q25 = std::numeric_limits<double>::quiet_NaN();
  double q75 = std::numeric_limits<double>::quiet_NaN();
};

/// Median and quartiles (linear interpolation between order statistics);
/// NaN entries are skipped.
Summary summarize(std::vector<double> values);

struct GridPointResult {
  GridPoint point;
  bool ok = true;
  std::string error;
  std::vector<RepetitionOutcome> repetitions;
  Summary rate, lee, red, alpha, sc_rate;
  Summary master_seconds, worker_seconds, compute_seconds, sc_seconds;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  /// Column values parsed as doubles; empty cells become NaN.
  std::vector<double> numeric(const std::string& column) const;
};

struct ScenarioResult {
  ExperimentConfig config;
  std::vector<GridPointResult> points;

  Table results_table() const;  // deterministic
  Table timings_table() const;
  Table repetitions_table() const;  // deterministic
  Table summary_table() const;      // one row per grid point
};

std::vector<GridPoint> expand_grid(const ExperimentConfig& config);

/// Runs every grid point for `repetitions` seeded repetitions. Repetition r
/// uses seed derive_seed(config.seed, r) at every grid point, so points share
/// common random numbers; its graph is drawn with derive_seed(rep_seed, 1).
/// A failing point is recorded and the remaining points still run.
ScenarioResult run_scenario(const ExperimentConfig& config);

/// Plot-ready (x, y, series) rows taken from three columns of `table`.
Table emit_plot_data(const Table& table, const std::string& x_column,
                     const std::string& y_column, const std::string& series_column);

/// Writes <scenario>.csv, <scenario>_reps.csv, <scenario>_timings.csv,
/// summary.csv and the plot files into config.out.
void write_scenario(const ScenarioResult& result);

}  // namespace dcd

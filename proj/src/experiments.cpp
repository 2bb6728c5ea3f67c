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

#include "dcd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dcd/spectral_core.hpp"

namespace dcd {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParseError, "config key '" + key + "': '" + text + "' is not a number");
}

Index to_index(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParseError,
              "config key '" + key + "': '" + text + "' is not an integer");
}

std::uint64_t to_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used == text.size() && text.front() != '-') return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParseError,
              "config key '" + key + "': '" + text + "' is not an unsigned integer");
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw Error(ErrorCode::kParseError, "config key '" + key + "': expected true/false");
}

template <typename T, typename Convert>
std::vector<T> list_of(const std::string& key, const std::string& text, Convert convert) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(static_cast<T>(convert(key, item)));
  return out;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// DetectConfig

Index DetectConfig::pilots_for(Index num_nodes) const {
  if (num_pilots > 0) return num_pilots;
  return static_cast<Index>(std::llround(pilot_ratio * static_cast<double>(num_nodes)));
}

Manifest DetectConfig::to_manifest() const {
  Manifest m;
  m.emplace_back("K", std::to_string(num_blocks));
  m.emplace_back("l", std::to_string(num_pilots));
  m.emplace_back("r", fmt(pilot_ratio));
  m.emplace_back("M", std::to_string(num_workers));
  m.emplace_back("policy", to_string(policy));
  m.emplace_back("alpha", unbalance ? fmt(*unbalance) : std::string());
  m.emplace_back("engine", to_string(engine));
  m.emplace_back("seed", std::to_string(seed));
  m.emplace_back("seed.pilots", std::to_string(derive_seed(seed, 2)));
  m.emplace_back("seed.plan", std::to_string(derive_seed(seed, 3)));
  m.emplace_back("seed.master", std::to_string(derive_seed(seed, 4)));
  m.emplace_back("lee", retain_left_singular ? "true" : "false");
  return m;
}

DetectConfig DetectConfig::from_manifest(const Manifest& manifest) {
  DetectConfig c;
  auto get = [&](const std::string& k) { return manifest_get(manifest, k); };
  if (auto v = get("K"); !v.empty()) c.num_blocks = static_cast<int>(to_index("K", v));
  if (auto v = get("l"); !v.empty()) c.num_pilots = to_index("l", v);
  if (auto v = get("r"); !v.empty()) c.pilot_ratio = to_double("r", v);
  if (auto v = get("M"); !v.empty()) c.num_workers = static_cast<int>(to_index("M", v));
  if (auto v = get("policy"); !v.empty()) c.policy = parse_pilot_policy(v);
  if (auto v = get("alpha"); !v.empty()) c.unbalance = to_double("alpha", v);
  if (auto v = get("engine"); !v.empty()) c.engine = parse_engine(v);
  if (auto v = get("seed"); !v.empty()) c.seed = to_u64("seed", v);
  if (auto v = get("lee"); !v.empty()) c.retain_left_singular = to_bool("lee", v);
  return c;
}

DetectRun detect(const SparseGraph& graph, const GroundTruth* truth, const DetectConfig& config) {
  const Index n = graph.num_nodes();
  const Index l = config.pilots_for(n);
  const PilotSet pilots =
      sample_pilots(n, l, config.num_blocks, config.policy, truth, derive_seed(config.seed, 2));
  PartitionMode mode = PartitionMode::even();
  if (config.unbalance) {
    require(truth != nullptr, "unbalanced partitions need ground truth");
    mode = PartitionMode::with_proportions(
        unbalanced_proportions(truth->num_blocks, config.num_workers, *config.unbalance));
  }
  DetectRun run;
  run.plan =
      plan_partition(n, pilots, config.num_workers, mode, truth, derive_seed(config.seed, 3));
  DetectOptions opts;
  opts.engine = config.engine;
  opts.retain_left_singular = config.retain_left_singular;
  run.result =
      run_detection(graph, config.num_blocks, run.plan, derive_seed(config.seed, 4), opts);
  return run;
}

// ---------------------------------------------------------------------------
// Configuration

const char* to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kPilotSweep: return "pilot_sweep";
    case Scenario::kSignalSweep: return "signal_sweep";
    case Scenario::kUnbalanceSweep: return "unbalance_sweep";
    case Scenario::kScCompare: return "sc_compare";
    case Scenario::kFileRun: return "file_run";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  for (Scenario s : {Scenario::kPilotSweep, Scenario::kSignalSweep, Scenario::kUnbalanceSweep,
                     Scenario::kScCompare, Scenario::kFileRun}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + name + "'");
}

void ExperimentConfig::validate() const {
  require(repetitions >= 1, "R must be at least 1");
  require(!num_blocks.empty() && !workers.empty() && !alpha.empty(), "grid axes must be non-empty");
  require(!pilots.empty() || !pilot_ratio.empty(), "set pilots (l) or pilot ratios (r)");
  if (scenario == Scenario::kFileRun) {
    require(!graph_path.empty(), "file_run needs 'graph'");
  } else {
    require(!num_nodes.empty() && !nu.empty() && !lambda.empty(), "grid axes must be non-empty");
  }
  for (int k : num_blocks) require(k >= 1, "K must be positive");
  for (int m : workers) require(m >= 1, "M must be positive");
  for (double r : pilot_ratio) require(r > 0.0 && r <= 1.0, "r must lie in (0, 1]");
}

ExperimentConfig parse_experiment_config(const Manifest& entries) {
  ExperimentConfig c;
  for (const auto& [key, value] : entries) {
    if (key == "scenario") {
      c.scenario = parse_scenario(value);
    } else if (key == "N") {
      c.num_nodes = list_of<Index>(key, value, to_index);
    } else if (key == "K") {
      c.num_blocks = list_of<int>(key, value, to_index);
    } else if (key == "nu") {
      c.nu = list_of<double>(key, value, to_double);
    } else if (key == "lambda") {
      c.lambda = list_of<double>(key, value, to_double);
    } else if (key == "r") {
      c.pilot_ratio = list_of<double>(key, value, to_double);
    } else if (key == "l") {
      c.pilots = list_of<Index>(key, value, to_index);
    } else if (key == "M") {
      c.workers = list_of<int>(key, value, to_index);
    } else if (key == "alpha") {
      c.alpha = list_of<double>(key, value, to_double);
    } else if (key == "R") {
      c.repetitions = static_cast<int>(to_index(key, value));
    } else if (key == "seed") {
      c.seed = to_u64(key, value);
    } else if (key == "engine") {
      c.engine = parse_engine(value);
    } else if (key == "policy") {
      c.policy = parse_pilot_policy(value);
    } else if (key == "lee") {
      c.compute_lee = to_bool(key, value);
    } else if (key == "sc") {
      c.run_sc = to_bool(key, value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "graph") {
      c.graph_path = value;
    } else if (key == "labels") {
      c.labels_path = value;
    } else if (key == "base") {
      c.id_base = parse_id_base(value);
    } else {
      throw Error(ErrorCode::kParseError, "unknown config key '" + key + "'");
    }
  }
  if (c.scenario == Scenario::kScCompare) c.run_sc = true;
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_manifest(path));
}

// ---------------------------------------------------------------------------
// Aggregation and tables

Summary summarize(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q25 = quantile(0.25);
  s.q75 = quantile(0.75);
  return s;
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += '\n';
  }
  return out;
}

std::vector<double> Table::numeric(const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  require(it != columns.end(), "table has no column '" + column + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& row : rows) {
    out.push_back(row[c].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(row[c]));
  }
  return out;
}

namespace {

const std::vector<std::string> kGridColumns = {"N", "K", "nu", "lambda", "l", "r", "M", "alpha"};

std::vector<std::string> grid_cells(const GridPoint& p) {
  return {std::to_string(p.num_nodes), std::to_string(p.num_blocks), fmt(p.nu), fmt(p.lambda),
          std::to_string(p.pilots), fmt(p.pilot_ratio), std::to_string(p.workers),
          fmt(p.alpha)};
}

void append(std::vector<std::string>& row, const Summary& s) {
  row.push_back(fmt(s.median));
  row.push_back(fmt(s.q25));
  row.push_back(fmt(s.q75));
}

void append_columns(std::vector<std::string>& cols, const std::string& name) {
  cols.push_back(name + "_median");
  cols.push_back(name + "_q25");
  cols.push_back(name + "_q75");
}

}  // namespace

Table ScenarioResult::results_table() const {
  Table t;
  t.columns = kGridColumns;
  t.columns.push_back("log_l");
  t.columns.push_back("reps");
  for (const char* name : {"rate", "lee", "red", "alpha", "sc_rate"}) append_columns(t.columns, name);
  for (const auto& p : points) {
    if (!p.ok) continue;
    auto row = grid_cells(p.point);
    row.push_back(fmt(std::log(static_cast<double>(p.point.pilots))));
    row.push_back(std::to_string(p.repetitions.size()));
    for (const Summary* s : {&p.rate, &p.lee, &p.red, &p.alpha, &p.sc_rate}) append(row, *s);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table ScenarioResult::timings_table() const {
  Table t;
  t.columns = kGridColumns;
  for (const char* name : {"master_seconds", "worker_seconds", "dcd_seconds", "sc_seconds"}) {
    append_columns(t.columns, name);
  }
  for (const auto& p : points) {
    if (!p.ok) continue;
    auto row = grid_cells(p.point);
    for (const Summary* s : {&p.master_seconds, &p.worker_seconds, &p.compute_seconds, &p.sc_seconds}) {
      append(row, *s);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table ScenarioResult::repetitions_table() const {
  Table t;
  t.columns = kGridColumns;
  for (const char* name : {"rep", "seed", "rate", "lee", "red", "max_alpha", "sc_rate"}) {
    t.columns.push_back(name);
  }
  for (const auto& p : points) {
    for (const auto& r : p.repetitions) {
      auto row = grid_cells(p.point);
      row.push_back(std::to_string(r.repetition));
      row.push_back(std::to_string(r.seed));
      for (double v : {r.rate, r.lee, r.red, r.max_alpha, r.sc_rate}) row.push_back(fmt(v));
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

Table ScenarioResult::summary_table() const {
  Table t;
  t.columns = {"point"};
  t.columns.insert(t.columns.end(), kGridColumns.begin(), kGridColumns.end());
  t.columns.push_back("status");
  t.columns.push_back("message");
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    auto cells = grid_cells(points[i].point);
    row.insert(row.end(), cells.begin(), cells.end());
    row.push_back(points[i].ok ? "ok" : "error");
    std::string msg = points[i].error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.push_back(msg);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table emit_plot_data(const Table& table, const std::string& x_column, const std::string& y_column,
                     const std::string& series_column) {
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), name);
    require(it != table.columns.end(), "table has no column '" + name + "'");
    return static_cast<std::size_t>(it - table.columns.begin());
  };
  const auto x = index_of(x_column);
  const auto y = index_of(y_column);
  const auto s = index_of(series_column);
  Table out;
  out.columns = {"x", "y", "series"};
  for (const auto& row : table.rows) out.rows.push_back({row[x], row[y], row[s]});
  return out;
}

// ---------------------------------------------------------------------------
// Running

std::vector<GridPoint> expand_grid(const ExperimentConfig& config) {
  std::vector<Index> sizes = config.num_nodes;
  std::vector<double> nus = config.nu;
  std::vector<double> lambdas = config.lambda;
  if (config.scenario == Scenario::kFileRun) {
    sizes = {0};  // filled from the loaded graph
    nus = {std::numeric_limits<double>::quiet_NaN()};
    lambdas = {std::numeric_limits<double>::quiet_NaN()};
  }
  const bool by_count = !config.pilots.empty();
  const std::size_t pilot_axis = by_count ? config.pilots.size() : config.pilot_ratio.size();
  std::vector<double> alphas = config.alpha;
  if (config.scenario != Scenario::kUnbalanceSweep) alphas = {0.0};

  std::vector<GridPoint> grid;
  for (Index n : sizes)
    for (int k : config.num_blocks)
      for (double nu : nus)
        for (double lambda : lambdas)
          for (std::size_t p = 0; p < pilot_axis; ++p)
            for (int m : config.workers)
              for (double a : alphas) {
                GridPoint g;
                g.num_nodes = n;
                g.num_blocks = k;
                g.nu = nu;
                g.lambda = lambda;
                g.workers = m;
                g.alpha = a;
                if (by_count) {
                  g.pilots = config.pilots[p];
                  g.pilot_ratio = n > 0 ? double(g.pilots) / double(n) : 0.0;
                } else {
                  g.pilot_ratio = config.pilot_ratio[p];
                  g.pilots = static_cast<Index>(std::llround(g.pilot_ratio * double(n)));
                }
                grid.push_back(g);
              }
  return grid;
}

namespace {

struct FileInputs {
  LoadedGraph graph;
  std::optional<LoadedLabels> labels;
};

RepetitionOutcome run_repetition(const ExperimentConfig& config, const GridPoint& point, int rep,
                                 const FileInputs* file) {
  RepetitionOutcome out;
  out.repetition = rep;
  out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep));

  SbmSample sample;
  const SparseGraph* graph = nullptr;
  const GroundTruth* truth = nullptr;
  Matrix connectivity;
  if (file) {
    graph = &file->graph.graph;
    if (file->labels) truth = &file->labels->truth;
  } else {
    const SbmParams params = balanced_sbm(point.num_nodes, point.num_blocks, point.nu, point.lambda);
    connectivity = params.connectivity;
    sample = sample_sbm(params, derive_seed(out.seed, 1));
    graph = &sample.graph;
    truth = &sample.truth;
  }

  DetectConfig dc;
  dc.num_blocks = point.num_blocks;
  dc.num_pilots = point.pilots;
  dc.num_workers = point.workers;
  dc.policy = config.policy;
  if (config.scenario == Scenario::kUnbalanceSweep) dc.unbalance = point.alpha;
  dc.engine = config.engine;
  dc.seed = out.seed;
  dc.retain_left_singular = config.compute_lee && !file;
  const DetectRun run = detect(*graph, truth, dc);
  const EvalReport report =
      evaluate(*graph, run.result, run.plan, truth, file ? nullptr : &connectivity);

  if (truth) {
    out.rate = report.misclustering_rate;
    out.max_alpha = *std::max_element(report.alpha.begin(), report.alpha.end());
  }
  if (report.lee) out.lee = *report.lee;
  if (report.red) out.red = *report.red;
  out.master_seconds = run.result.timings.master_seconds;
  for (double s : run.result.timings.worker_seconds) out.worker_seconds += s;
  out.compute_seconds = run.result.timings.compute_seconds();

  if (config.run_sc) {
    const auto start = Clock::now();
    const SpectralClustering sc = spectral_cluster(*graph, point.num_blocks, derive_seed(out.seed, 4));
    out.sc_seconds = seconds_since(start);
    if (truth) out.sc_rate = misclustering_rate(sc.labels, truth->labels, point.num_blocks).rate;
  }
  return out;
}

}  // namespace

ScenarioResult run_scenario(const ExperimentConfig& config) {
  config.validate();
  ScenarioResult result;
  result.config = config;

  std::optional<FileInputs> file;
  if (config.scenario == Scenario::kFileRun) {
    file.emplace();
    file->graph = load_edge_list(config.graph_path, config.id_base);
    if (!config.labels_path.empty()) {
      file->labels = load_labels(config.labels_path, file->graph.id_map);
    }
  }

  for (GridPoint point : expand_grid(config)) {
    if (file) {
      point.num_nodes = file->graph.graph.num_nodes();
      if (config.pilots.empty()) {
        point.pilots = static_cast<Index>(std::llround(point.pilot_ratio * double(point.num_nodes)));
      } else {
        point.pilot_ratio = double(point.pilots) / double(point.num_nodes);
      }
    }
    GridPointResult pr;
    pr.point = point;
    try {
      for (int rep = 0; rep < config.repetitions; ++rep) {
        pr.repetitions.push_back(run_repetition(config, point, rep, file ? &*file : nullptr));
      }
    } catch (const std::exception& e) {
      pr.ok = false;
      pr.error = e.what();
      if (const auto* err = dynamic_cast<const Error*>(&e)) {
        pr.error = std::string(to_string(err->code())) + ": " + pr.error;
      }
    }
    auto collect = [&](double RepetitionOutcome::*field) {
      std::vector<double> v;
      for (const auto& r : pr.repetitions) v.push_back(r.*field);
      return summarize(std::move(v));
    };
    pr.rate = collect(&RepetitionOutcome::rate);
    pr.lee = collect(&RepetitionOutcome::lee);
    pr.red = collect(&RepetitionOutcome::red);
    pr.alpha = collect(&RepetitionOutcome::max_alpha);
    pr.sc_rate = collect(&RepetitionOutcome::sc_rate);
    pr.master_seconds = collect(&RepetitionOutcome::master_seconds);
    pr.worker_seconds = collect(&RepetitionOutcome::worker_seconds);
    pr.compute_seconds = collect(&RepetitionOutcome::compute_seconds);
    pr.sc_seconds = collect(&RepetitionOutcome::sc_seconds);
    result.points.push_back(std::move(pr));
  }
  return result;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

void write_scenario(const ScenarioResult& result) {
  const auto& dir = result.config.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const std::string name = to_string(result.config.scenario);
  const Table results = result.results_table();
  const Table timings = result.timings_table();
  write_text(dir / (name + ".csv"), results.to_csv());
  write_text(dir / (name + "_reps.csv"), result.repetitions_table().to_csv());
  write_text(dir / (name + "_timings.csv"), timings.to_csv());
  write_text(dir / "summary.csv", result.summary_table().to_csv());

  const std::string rate_y =
      result.config.scenario == Scenario::kFileRun && result.config.labels_path.empty()
          ? "red_median"
          : "rate_median";
  switch (result.config.scenario) {
    case Scenario::kPilotSweep:
      write_text(dir / "plot_rate.csv", emit_plot_data(results, "r", rate_y, "K").to_csv());
      if (result.config.compute_lee) {
        write_text(dir / "plot_lee.csv", emit_plot_data(results, "log_l", "lee_median", "N").to_csv());
      }
      break;
    case Scenario::kSignalSweep:
      write_text(dir / "plot_rate_lambda.csv",
                 emit_plot_data(results, "lambda", rate_y, "nu").to_csv());
      write_text(dir / "plot_rate_nu.csv", emit_plot_data(results, "nu", rate_y, "lambda").to_csv());
      break;
    case Scenario::kUnbalanceSweep:
      write_text(dir / "plot_rate.csv", emit_plot_data(results, "alpha", rate_y, "K").to_csv());
      break;
    case Scenario::kScCompare:
      write_text(dir / "plot_rate.csv", emit_plot_data(results, "r", rate_y, "M").to_csv());
      write_text(dir / "plot_time.csv",
                 emit_plot_data(timings, "r", "dcd_seconds_median", "M").to_csv());
      break;
    case Scenario::kFileRun:
      write_text(dir / "plot_rate.csv", emit_plot_data(results, "r", rate_y, "M").to_csv());
      break;
  }
}

}  // namespace dcd

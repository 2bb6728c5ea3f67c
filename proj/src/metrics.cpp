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

#include "dcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "dcd/dcd_worker.hpp"
#include "dcd/spectral_core.hpp"

namespace dcd {

Matrix confusion_matrix(const Labels& estimated, const Labels& truth, int k) {
  require(estimated.size() == truth.size(), "label vectors must have equal length");
  Matrix counts = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    require(estimated[i] >= 0 && estimated[i] < k && truth[i] >= 0 && truth[i] < k,
            "label out of range");
    counts(estimated[i], truth[i]) += 1.0;
  }
  return counts;
}

std::vector<int> max_weight_assignment_exhaustive(const Matrix& weight) {
  const int k = static_cast<int>(weight.rows());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_value = -std::numeric_limits<double>::infinity();
  do {
    double value = 0.0;
    for (int e = 0; e < k; ++e) value += weight(e, perm[e]);
    if (value > best_value) {
      best_value = value;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<int> max_weight_assignment(const Matrix& weight) {
  // Shortest augmenting path Hungarian method on cost = -weight, with row and
  // column potentials; 1-based internally, column 0 is a sentinel.
  const int n = static_cast<int>(weight.rows());
  require(weight.cols() == n, "assignment matrix must be square");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const int r0 = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = -weight(r0 - 1, c - 1) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n);
  for (int c = 1; c <= n; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

MatchedRate misclustering_rate(const Labels& estimated, const Labels& truth, int k) {
  const Matrix counts = confusion_matrix(estimated, truth, k);
  MatchedRate out;
  out.permutation =
      k <= 8 ? max_weight_assignment_exhaustive(counts) : max_weight_assignment(counts);
  double matched = 0.0;
  for (int e = 0; e < k; ++e) matched += counts(e, out.permutation[e]);
  out.rate = truth.empty() ? 0.0 : 1.0 - matched / static_cast<double>(truth.size());
  return out;
}

double lee(const Matrix& estimated, const Matrix& population) {
  const double residual = procrustes_align(estimated, population).residual;
  if (residual == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(residual);
}

double relative_density(const SparseGraph& graph, const Labels& labels) {
  const Index n = graph.num_nodes();
  require(static_cast<Index>(labels.size()) == n, "labels must cover every node");
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> sizes(std::max(k, 0), 0.0);
  for (int g : labels) {
    require(g >= 0, "labels must be non-negative");
    sizes[g] += 1.0;
  }
  const auto non_empty = std::count_if(sizes.begin(), sizes.end(), [](double s) { return s > 0; });
  require(non_empty >= 2, "relative_density needs at least two non-empty clusters");

  const double total = static_cast<double>(n);
  double within_pairs = 0.0;
  for (double s : sizes) within_pairs += s * (s - 1.0) / 2.0;
  const double between_pairs = total * (total - 1.0) / 2.0 - within_pairs;
  require(within_pairs > 0.0, "relative_density needs at least one within-cluster pair");

  double within_edges = 0.0;
  double between_edges = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.neighbors(i)) {
      if (j <= i) continue;
      (labels[i] == labels[j] ? within_edges : between_edges) += 1.0;
    }
  }
  const double within_density = within_edges / within_pairs;
  if (within_density == 0.0) {
    throw Error(ErrorCode::kDivisionByZero, "relative_density: within-cluster density is zero");
  }
  return (between_edges / between_pairs) / within_density;
}

std::vector<double> unbalance_alpha(const PartitionPlan& plan, const GroundTruth& truth) {
  const int k = truth.num_blocks;
  const double n = static_cast<double>(truth.labels.size());
  const auto global = truth.block_counts();
  std::vector<double> pilot_counts(k, 0.0);
  for (Index p : plan.pilot.indices) pilot_counts[truth.labels[p]] += 1.0;

  std::vector<double> out;
  for (const auto& local : plan.worker_assignments) {
    std::vector<double> counts = pilot_counts;
    for (Index i : local) counts[truth.labels[i]] += 1.0;
    const double size = static_cast<double>(plan.pilot.size() + local.size());
    double worst = 0.0;
    for (int b = 0; b < k; ++b) {
      worst = std::max(worst, std::abs(counts[b] / size - global[b] / n));
    }
    out.push_back(worst);
  }
  return out;
}

EvalReport evaluate(const SparseGraph& graph, const ClusteringResult& result,
                    const PartitionPlan& plan, const GroundTruth* truth,
                    const Matrix* connectivity) {
  EvalReport report;
  const int k = result.num_blocks;
  try {
    report.red = relative_density(graph, result.labels);
  } catch (const Error&) {
    report.red.reset();
  }
  if (truth == nullptr) return report;

  const MatchedRate overall = misclustering_rate(result.labels, truth->labels, k);
  report.misclustering_rate = overall.rate;
  report.matching_permutation = overall.permutation;
  for (const auto& local : plan.worker_assignments) {
    Index wrong = 0;
    for (Index i : local) wrong += overall.permutation[result.labels[i]] != truth->labels[i];
    report.per_worker_rates.push_back(local.empty() ? 0.0
                                                    : double(wrong) / double(local.size()));
  }
  report.alpha = unbalance_alpha(plan, *truth);

  const bool have_vectors =
      !result.workers.empty() &&
      std::all_of(result.workers.begin(), result.workers.end(),
                  [](const WorkerResult& w) { return w.left_singular.has_value(); });
  if (connectivity != nullptr && have_vectors) {
    Labels pilot_truth;
    for (Index p : plan.pilot.indices) pilot_truth.push_back(truth->labels[p]);
    const Matrix theta_pilot = membership_matrix(pilot_truth, k);
    double total = 0.0;
    for (int m = 0; m < plan.num_workers(); ++m) {
      Labels sub_truth;
      for (Index i : plan.worker_nodes(m)) sub_truth.push_back(truth->labels[i]);
      const Matrix population =
          embed_population(membership_matrix(sub_truth, k), theta_pilot, *connectivity);
      total += lee(*result.workers[m].left_singular, population);
    }
    report.lee = total / plan.num_workers();
  }
  return report;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::string report_csv_header() {
  return "misclustering_rate,lee,red,num_workers,per_worker_rates,alpha,matching_permutation";
}

std::string report_csv_row(const EvalReport& report) {
  std::string row = fmt_double(report.misclustering_rate);
  row += ',' + (report.lee ? fmt_double(*report.lee) : std::string());
  row += ',' + (report.red ? fmt_double(*report.red) : std::string());
  row += ',' + std::to_string(report.per_worker_rates.size());
  row += ',' + join(report.per_worker_rates);
  row += ',' + join(report.alpha);
  row += ',' + join(report.matching_permutation);
  return row;
}

}  // namespace dcd

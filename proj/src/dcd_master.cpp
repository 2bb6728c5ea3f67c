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

#include "dcd/dcd_master.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dcd {

const char* to_string(PilotPolicy policy) {
  return policy == PilotPolicy::kStratified ? "stratified" : "uniform";
}

PilotPolicy parse_pilot_policy(const std::string& name) {
  if (name == "stratified") return PilotPolicy::kStratified;
  if (name == "uniform") return PilotPolicy::kUniform;
  throw Error(ErrorCode::kInvalidArgument, "unknown pilot policy '" + name + "'");
}

std::vector<Index> largest_remainder(const std::vector<double>& weights, Index total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(sum > 0.0, "largest_remainder: weights must have a positive sum");
  std::vector<Index> counts(weights.size());
  std::vector<double> remainder(weights.size());
  Index assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double exact = total * weights[k] / sum;
    counts[k] = static_cast<Index>(std::floor(exact));
    remainder[k] = exact - counts[k];
    assigned += counts[k];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t p = 0; assigned < total; p = (p + 1) % order.size()) {
    ++counts[order[p]];
    ++assigned;
  }
  return counts;
}

PilotSet sample_pilots(Index num_nodes, Index num_pilots, int num_blocks, PilotPolicy policy,
                       const GroundTruth* truth, std::uint64_t seed) {
  require(num_pilots >= num_blocks, "number of pilots must be at least K");
  require(num_pilots <= num_nodes, "number of pilots must not exceed N");
  std::mt19937_64 rng(seed);
  PilotSet out;
  out.policy = policy;
  out.seed = seed;

  if (policy == PilotPolicy::kUniform) {
    IndexList all(num_nodes);
    std::iota(all.begin(), all.end(), Index{0});
    std::shuffle(all.begin(), all.end(), rng);
    out.indices.assign(all.begin(), all.begin() + num_pilots);
  } else {
    if (truth == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "stratified pilot sampling requires ground truth");
    }
    require(static_cast<Index>(truth->labels.size()) == num_nodes,
            "ground truth length must equal N");
    std::vector<IndexList> members(truth->num_blocks);
    for (Index i = 0; i < num_nodes; ++i) members[truth->labels[i]].push_back(i);
    std::vector<double> sizes;
    for (const auto& m : members) sizes.push_back(static_cast<double>(m.size()));
    const auto counts = largest_remainder(sizes, num_pilots);
    for (std::size_t k = 0; k < members.size(); ++k) {
      std::shuffle(members[k].begin(), members[k].end(), rng);
      out.indices.insert(out.indices.end(), members[k].begin(), members[k].begin() + counts[k]);
    }
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

std::vector<std::int32_t> select_pseudo_centers(const Matrix& embedding, const Matrix& centers,
                                                const Labels& labels,
                                                std::vector<std::string>* warnings) {
  const Index l = embedding.rows();
  const int k = static_cast<int>(centers.rows());
  require(static_cast<Index>(labels.size()) == l, "labels must cover every pilot");
  std::vector<bool> claimed(l, false);
  std::vector<std::int32_t> picks(k, -1);
  std::vector<Index> order(l);
  Vector dist(l);
  for (int c = 0; c < k; ++c) {
    for (Index i = 0; i < l; ++i) dist(i) = (embedding.row(i) - centers.row(c)).squaredNorm();
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return dist(a) < dist(b); });
    for (Index i : order) {
      if (claimed[i] || labels[i] != c) continue;
      picks[c] = static_cast<std::int32_t>(i);
      break;
    }
    if (picks[c] < 0) {
      throw Error(ErrorCode::kEmptyCluster,
                  "no unclaimed pilot for cluster " + std::to_string(c));
    }
    if (picks[c] != order.front() && warnings) {
      warnings->push_back("CenterCollision: cluster " + std::to_string(c) +
                          " nearest pilot " + std::to_string(order.front()) +
                          " unavailable, using " + std::to_string(picks[c]));
    }
    claimed[picks[c]] = true;
  }
  return picks;
}

MasterOutput master_cluster(const SparseGraph& pilot_graph, int k, std::uint64_t seed,
                            const EigOptions& eig, const KMeansOptions& km) {
  require(pilot_graph.num_nodes() >= k, "pilot graph must have at least K nodes");
  SpectralClustering sc = spectral_cluster(pilot_graph, k, seed, eig, km);
  MasterOutput out;
  out.centers.pilot_local_indices =
      select_pseudo_centers(sc.embedding, sc.centers, sc.labels, &out.warnings);
  out.centers.master_labels = std::move(sc.labels);
  out.pilot_eigvecs = std::move(sc.embedding);
  out.eigenvalues = std::move(sc.eigenvalues);
  out.kmeans_centers = std::move(sc.centers);
  out.isolated_pilots = std::move(sc.isolated);
  return out;
}

}  // namespace dcd

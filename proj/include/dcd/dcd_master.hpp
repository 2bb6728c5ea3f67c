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
#include <optional>
#include <string>
#include <vector>

#include "dcd/common.hpp"
#include "dcd/sbm_model.hpp"
#include "dcd/spectral_core.hpp"

namespace dcd {

enum class PilotPolicy { kStratified, kUniform };

const char* to_string(PilotPolicy policy);
PilotPolicy parse_pilot_policy(const std::string& name);

struct PilotSet {
  IndexList indices;  // sorted, distinct global node ids
  PilotPolicy policy = PilotPolicy::kUniform;
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(indices.size()); }
};

/// Draws l pilot nodes out of N without replacement.
///
/// Stratified sampling allocates round(l m_k / N) pilots to block k using the
/// largest-remainder rule, so counts sum exactly to l; it needs ground truth.
/// Uniform sampling ignores labels.
PilotSet sample_pilots(Index num_nodes, Index num_pilots, int num_blocks, PilotPolicy policy,
                       const GroundTruth* truth, std::uint64_t seed);

/// Largest-remainder apportionment of `total` over `weights`.
std::vector<Index> largest_remainder(const std::vector<double>& weights, Index total);

struct PseudoCenters {
  std::vector<std::int32_t> pilot_local_indices;  // i_1..i_K, positions within the pilot set
  Labels master_labels;                           // length l
};

struct MasterOutput {
  Matrix pilot_eigvecs;  // l x K
  Vector eigenvalues;
  Matrix kmeans_centers;
  PseudoCenters centers;
  IndexList isolated_pilots;  // positions within the pilot set
  std::vector<std::string> warnings;
};

/// Picks, for every k-means center, the pilot row nearest to it (smallest
/// index on ties). A pick that is already claimed, or that k-means assigned to
/// a different cluster, falls back to the nearest unclaimed pilot of cluster k
/// and records a CenterCollision warning.
std::vector<std::int32_t> select_pseudo_centers(const Matrix& embedding, const Matrix& centers,
                                                const Labels& labels,
                                                std::vector<std::string>* warnings);

/// Spectral clustering of the pilot graph and pseudo-center selection.
MasterOutput master_cluster(const SparseGraph& pilot_graph, int k, std::uint64_t seed,
                            const EigOptions& eig = {}, const KMeansOptions& km = {});

}  // namespace dcd

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
#include <span>
#include <utility>
#include <vector>

#include "dcd/common.hpp"

namespace dcd {

/// Undirected simple graph in compressed sparse row form.
///
/// Each undirected edge appears twice, once in each endpoint's row. Rows are
/// sorted and the diagonal is empty.
class SparseGraph {
 public:
  SparseGraph() : row_offsets_{0} {}

  /// Builds from an arbitrary edge list. Both orientations, duplicates and
  /// self-loops are accepted and normalized away.
  static SparseGraph from_edges(Index num_nodes,
                                std::span<const std::pair<Index, Index>> edges);

  /// Adopts pre-built CSR arrays; throws if they violate the invariants.
  static SparseGraph from_csr(Index num_nodes, std::vector<Index> row_offsets,
                              std::vector<Index> col_indices);

  Index num_nodes() const { return static_cast<Index>(row_offsets_.size()) - 1; }
  Index num_edges() const { return static_cast<Index>(col_indices_.size()) / 2; }
  Index degree(Index i) const { return row_offsets_[i + 1] - row_offsets_[i]; }
  std::span<const Index> neighbors(Index i) const {
    return {col_indices_.data() + row_offsets_[i],
            static_cast<std::size_t>(degree(i))};
  }
  bool has_edge(Index i, Index j) const;

  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }

  /// Subgraph induced by `nodes`; node p of the result is nodes[p].
  SparseGraph induced_subgraph(std::span<const Index> nodes) const;

  /// 0/1 adjacency as an Eigen sparse matrix.
  SparseMatrix adjacency() const;

  /// Throws Error(kInvalidArgument) if symmetry, ordering or loop-freeness fails.
  void validate() const;

  friend bool operator==(const SparseGraph&, const SparseGraph&) = default;

 private:
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
};

struct SbmParams {
  Index num_nodes = 0;
  int num_blocks = 0;
  std::vector<Index> block_sizes;
  Matrix connectivity;

  /// Checks size sums, symmetry, the [0,1] range and (unless disabled) full rank of B.
  void validate(bool require_full_rank = true) const;
};

struct GroundTruth {
  Labels labels;
  int num_blocks = 0;

  std::vector<Index> block_counts() const;
};

/// Membership matrix Theta (one-hot rows) for the given labels.
Matrix membership_matrix(const Labels& labels, int num_blocks);

/// nu * (lambda * I + (1 - lambda) * 1 1^T).
Matrix make_connectivity(double nu, double lambda, int num_blocks);

/// Block sizes as equal as possible; the first N % K blocks get one extra node.
std::vector<Index> balanced_block_sizes(Index num_nodes, int num_blocks);

/// Convenience: balanced SbmParams with the parametric connectivity.
SbmParams balanced_sbm(Index num_nodes, int num_blocks, double nu, double lambda);

struct SbmSample {
  SparseGraph graph;
  GroundTruth truth;
};

/// Samples a graph. Nodes are labelled contiguously by block. Within each
/// block pair, candidate pairs are enumerated in a fixed linear order and edges
/// are placed by geometric skipping, which is exact independent Bernoulli
/// sampling at O(edges) cost. Same (params, seed) yields the same graph.
SbmSample sample_sbm(const SbmParams& params, std::uint64_t seed);

/// Worker-by-block proportion matrix for the unbalanced allocation scheme:
///   pi(m, k) = 1/K + (k - (K+1)/2) * sign(m - (M+1)/2) * alpha / (K (K-1))
/// evaluated with 1-based k and m, sign(0) = 0. Rows of the result are
/// workers (0-based), columns are blocks.
Matrix unbalanced_proportions(int num_blocks, int num_workers, double alpha);

}  // namespace dcd

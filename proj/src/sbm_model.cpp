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

#include "dcd/sbm_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dcd {

// ---------------------------------------------------------------------------
// SparseGraph

SparseGraph SparseGraph::from_edges(Index num_nodes,
                                    std::span<const std::pair<Index, Index>> edges) {
  require(num_nodes >= 0, "num_nodes must be non-negative");
  std::vector<Index> degree(num_nodes, 0);
  for (const auto& [u, v] : edges) {
    require(u >= 0 && u < num_nodes && v >= 0 && v < num_nodes,
            "edge endpoint out of range");
    if (u == v) continue;
    ++degree[u];
    ++degree[v];
  }
  std::vector<Index> offsets(num_nodes + 1, 0);
  for (Index i = 0; i < num_nodes; ++i) offsets[i + 1] = offsets[i] + degree[i];
  std::vector<Index> cols(offsets.back());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    cols[cursor[u]++] = v;
    cols[cursor[v]++] = u;
  }

  // Sort and deduplicate each row, compacting in place.
  std::vector<Index> out_offsets(num_nodes + 1, 0);
  Index write = 0;
  for (Index i = 0; i < num_nodes; ++i) {
    auto first = cols.begin() + offsets[i];
    auto last = cols.begin() + offsets[i + 1];
    std::sort(first, last);
    auto unique_end = std::unique(first, last);
    for (auto it = first; it != unique_end; ++it) cols[write++] = *it;
    out_offsets[i + 1] = write;
  }
  cols.resize(write);

  SparseGraph g;
  g.row_offsets_ = std::move(out_offsets);
  g.col_indices_ = std::move(cols);
  return g;
}

SparseGraph SparseGraph::from_csr(Index num_nodes, std::vector<Index> row_offsets,
                                  std::vector<Index> col_indices) {
  require(static_cast<Index>(row_offsets.size()) == num_nodes + 1,
          "row_offsets must have num_nodes + 1 entries");
  SparseGraph g;
  g.row_offsets_ = std::move(row_offsets);
  g.col_indices_ = std::move(col_indices);
  g.validate();
  return g;
}

bool SparseGraph::has_edge(Index i, Index j) const {
  auto row = neighbors(i);
  return std::binary_search(row.begin(), row.end(), j);
}

void SparseGraph::validate() const {
  const Index n = num_nodes();
  require(!row_offsets_.empty() && row_offsets_.front() == 0, "bad row_offsets");
  require(row_offsets_.back() == static_cast<Index>(col_indices_.size()),
          "row_offsets do not match col_indices");
  for (Index i = 0; i < n; ++i) {
    require(row_offsets_[i] <= row_offsets_[i + 1], "row_offsets not monotone");
    auto row = neighbors(i);
    for (std::size_t p = 0; p < row.size(); ++p) {
      const Index j = row[p];
      require(j >= 0 && j < n, "column index out of range");
      require(j != i, "self-loop present");
      require(p == 0 || row[p - 1] < j, "row not strictly sorted");
      require(has_edge(j, i), "adjacency not symmetric");
    }
  }
}

SparseGraph SparseGraph::induced_subgraph(std::span<const Index> nodes) const {
  const Index n = num_nodes();
  std::vector<Index> position(n, -1);
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    require(nodes[p] >= 0 && nodes[p] < n, "subgraph node out of range");
    require(position[nodes[p]] < 0, "subgraph nodes must be distinct");
    position[nodes[p]] = static_cast<Index>(p);
  }
  SparseGraph g;
  g.row_offsets_.assign(nodes.size() + 1, 0);
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    for (Index j : neighbors(nodes[p])) {
      if (position[j] >= 0) g.col_indices_.push_back(position[j]);
    }
    std::sort(g.col_indices_.begin() + g.row_offsets_[p], g.col_indices_.end());
    g.row_offsets_[p + 1] = static_cast<Index>(g.col_indices_.size());
  }
  return g;
}

SparseMatrix SparseGraph::adjacency() const {
  const Index n = num_nodes();
  SparseMatrix a(n, n);
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(col_indices_.size());
  for (Index i = 0; i < n; ++i) {
    for (Index j : neighbors(i)) triplets.emplace_back(i, j, 1.0);
  }
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

// ---------------------------------------------------------------------------
// Model parameters

void SbmParams::validate(bool require_full_rank) const {
  require(num_nodes > 0, "num_nodes must be positive");
  require(num_blocks > 0, "num_blocks must be positive");
  require(static_cast<int>(block_sizes.size()) == num_blocks,
          "block_sizes must have num_blocks entries");
  Index total = 0;
  for (Index s : block_sizes) {
    require(s > 0, "block sizes must be positive");
    total += s;
  }
  require(total == num_nodes, "block sizes must sum to num_nodes");
  require(connectivity.rows() == num_blocks && connectivity.cols() == num_blocks,
          "connectivity must be K x K");
  for (int a = 0; a < num_blocks; ++a) {
    for (int b = 0; b < num_blocks; ++b) {
      const double p = connectivity(a, b);
      require(p >= 0.0 && p <= 1.0, "connectivity entries must lie in [0,1]");
      require(p == connectivity(b, a), "connectivity must be symmetric");
    }
  }
  if (!require_full_rank) return;
  Eigen::JacobiSVD<Matrix> svd(connectivity);
  const double smallest = svd.singularValues()(num_blocks - 1);
  require(smallest > 1e-12, "connectivity must have full rank");
}

std::vector<Index> GroundTruth::block_counts() const {
  std::vector<Index> counts(num_blocks, 0);
  for (int g : labels) ++counts[g];
  return counts;
}

Matrix membership_matrix(const Labels& labels, int num_blocks) {
  Matrix theta = Matrix::Zero(static_cast<Index>(labels.size()), num_blocks);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < num_blocks, "label out of range");
    theta(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return theta;
}

Matrix make_connectivity(double nu, double lambda, int num_blocks) {
  require(num_blocks >= 1, "num_blocks must be at least 1");
  return nu * (lambda * Matrix::Identity(num_blocks, num_blocks) +
               (1.0 - lambda) * Matrix::Ones(num_blocks, num_blocks));
}

std::vector<Index> balanced_block_sizes(Index num_nodes, int num_blocks) {
  require(num_blocks >= 1, "num_blocks must be at least 1");
  std::vector<Index> sizes(num_blocks, num_nodes / num_blocks);
  for (Index k = 0; k < num_nodes % num_blocks; ++k) ++sizes[k];
  return sizes;
}

SbmParams balanced_sbm(Index num_nodes, int num_blocks, double nu, double lambda) {
  SbmParams p;
  p.num_nodes = num_nodes;
  p.num_blocks = num_blocks;
  p.block_sizes = balanced_block_sizes(num_nodes, num_blocks);
  p.connectivity = make_connectivity(nu, lambda, num_blocks);
  return p;
}

namespace {

// Visits the positions in [0, count) selected by independent Bernoulli(p)
// trials, in increasing order.
template <typename Visit>
void bernoulli_positions(Index count, double p, std::mt19937_64& rng, Visit&& visit) {
  if (count <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (Index i = 0; i < count; ++i) visit(i);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  Index pos = -1;
  while (true) {
    const double u = 1.0 - unif(rng);  // (0, 1]
    const double skip = std::floor(std::log(u) / log_q);
    if (skip >= static_cast<double>(count - pos)) return;
    pos += 1 + static_cast<Index>(skip);
    if (pos >= count) return;
    visit(pos);
  }
}

}  // namespace

SbmSample sample_sbm(const SbmParams& params, std::uint64_t seed) {
  // Sampling is well defined for any B; rank matters only to the detectors.
  params.validate(false);
  const int K = params.num_blocks;
  std::vector<Index> start(K + 1, 0);
  for (int k = 0; k < K; ++k) start[k + 1] = start[k] + params.block_sizes[k];

  SbmSample out;
  out.truth.num_blocks = K;
  out.truth.labels.resize(params.num_nodes);
  for (int k = 0; k < K; ++k) {
    std::fill(out.truth.labels.begin() + start[k], out.truth.labels.begin() + start[k + 1], k);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::pair<Index, Index>> edges;
  for (int a = 0; a < K; ++a) {
    const Index size_a = params.block_sizes[a];
    // Within-block pairs i < j in row-major triangular order.
    {
      Index row = 0;
      Index row_begin = 0;  // linear index of (row, row + 1)
      bernoulli_positions(size_a * (size_a - 1) / 2, params.connectivity(a, a), rng,
                          [&](Index pos) {
                            while (pos >= row_begin + (size_a - 1 - row)) {
                              row_begin += size_a - 1 - row;
                              ++row;
                            }
                            const Index col = row + 1 + (pos - row_begin);
                            edges.emplace_back(start[a] + row, start[a] + col);
                          });
    }
    for (int b = a + 1; b < K; ++b) {
      const Index size_b = params.block_sizes[b];
      bernoulli_positions(size_a * size_b, params.connectivity(a, b), rng, [&](Index pos) {
        edges.emplace_back(start[a] + pos / size_b, start[b] + pos % size_b);
      });
    }
  }
  out.graph = SparseGraph::from_edges(params.num_nodes, edges);
  return out;
}

Matrix unbalanced_proportions(int num_blocks, int num_workers, double alpha) {
  require(num_blocks >= 1 && num_workers >= 1, "K and M must be positive");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  const int K = num_blocks;
  const int M = num_workers;
  Matrix pi(M, K);
  for (int m = 1; m <= M; ++m) {
    const double centered_m = m - (M + 1) / 2.0;
    const double sign = (centered_m > 0) - (centered_m < 0);
    for (int k = 1; k <= K; ++k) {
      const double shift =
          K == 1 ? 0.0 : (k - (K + 1) / 2.0) * sign * alpha / (K * (K - 1.0));
      const double value = 1.0 / K + shift;
      if (!(value > 0.0 && value < 1.0) && K > 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "alpha produces a proportion outside (0, 1)");
      }
      pi(m - 1, k - 1) = value;
    }
  }
  return pi;
}

}  // namespace dcd

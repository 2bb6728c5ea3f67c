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
#include <span>

#include "dcd/common.hpp"
#include "dcd/spectral_core.hpp"

namespace dcd {

/// Everything worker m stores: links from S_m = pilots + locals to the pilots.
struct WorkerTask {
  int worker_id = 0;
  IndexList pilot_indices;     // global ids, length l
  IndexList local_indices;     // global ids, length n_m
  SparseMatrix sub_adjacency;  // (l + n_m) x l, pilot rows first

  Index num_pilots() const { return static_cast<Index>(pilot_indices.size()); }
  Index num_local() const { return static_cast<Index>(local_indices.size()); }
};

struct WorkerOptions {
  bool retain_left_singular = false;
  /// Also assign the pilot rows (diagnostics only; never used in the output).
  bool label_pilots = false;
  EigOptions eig;
};

struct WorkerResult {
  int worker_id = 0;
  Labels labels;               // one per local node
  IndexList degenerate_nodes;  // global ids of locals without pilot links
  Labels pilot_labels;         // filled when label_pilots is set
  std::optional<Matrix> left_singular;

  friend bool operator==(const WorkerResult&, const WorkerResult&) = default;
};

/// Rectangular Laplacian, Gram-trick SVD, then nearest pseudo-center row.
/// Throws Error(kInvalidCenters) for out-of-range centers and RankDeficient
/// when S_m cannot support K singular directions.
WorkerResult worker_detect(const WorkerTask& task, std::span<const std::int32_t> centers, int k,
                           const WorkerOptions& opts = {});

/// Top-K left singular vectors of the population rectangular Laplacian
/// built from exact memberships of S_m (rows) and of the pilots (columns).
///
/// Uses the factorization L = Psi_S C Psi_0^T with Psi the column-normalized
/// memberships and C a K x K core, so the cost is O(n K^2).
Matrix embed_population(const Matrix& theta_sub, const Matrix& theta_pilot,
                        const Matrix& connectivity);

}  // namespace dcd

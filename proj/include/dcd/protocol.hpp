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
#include <string>
#include <variant>
#include <vector>

#include "dcd/common.hpp"
#include "dcd/dcd_master.hpp"
#include "dcd/dcd_worker.hpp"
#include "dcd/sbm_model.hpp"

namespace dcd {

// ---------------------------------------------------------------------------
// Partition plans

struct PartitionMode {
  enum class Kind { kEven, kProportions };
  Kind kind = Kind::kEven;
  Matrix proportions;  // M x K, rows are workers; used by kProportions

  static PartitionMode even() { return {}; }
  static PartitionMode with_proportions(Matrix pi) { return {Kind::kProportions, std::move(pi)}; }
};

struct PartitionPlan {
  PilotSet pilot;
  std::vector<IndexList> worker_assignments;  // M sorted, disjoint sets covering V \ P
  PartitionMode mode;

  int num_workers() const { return static_cast<int>(worker_assignments.size()); }
  /// S_m = P u M_m with pilots first.
  IndexList worker_nodes(int m) const;
};

/// Distributes the non-pilot nodes over M workers.
///
/// Even mode shuffles and deals near-equal chunks (sizes differ by at most
/// one). Proportions mode gives worker m about pi(m, k) n_m nodes of block k,
/// with integer counts reconciled so that every block is used up exactly.
PartitionPlan plan_partition(Index num_nodes, const PilotSet& pilot, int num_workers,
                             const PartitionMode& mode, const GroundTruth* truth,
                             std::uint64_t seed);

/// Worker m's task: rows are pilots (in pilot order) then M_m, columns the pilots.
WorkerTask extract_subadjacency(const SparseGraph& graph, const PartitionPlan& plan, int m);

// ---------------------------------------------------------------------------
// Messages
//
// Every message is a record
//
//   u32 tag | u64 payload_bytes | payload
//
// with all integers little-endian. Payloads:
//
//   AssignTask (tag 1):
//     i32 worker_id | u64 l | l x i64 pilot ids | u64 n_m | n_m x i64 local ids
//     | u64 rows | u64 cols | u64 nnz | (rows + 1) x i64 row offsets
//     | nnz x i64 column indices            (entries are implicitly 1)
//   BroadcastCenters (tag 2):
//     K x i32 pilot positions               (K = payload_bytes / 4)
//   ReturnLabels (tag 3):
//     i32 worker_id | u64 n_m | n_m x i32 labels | u64 d | d x i64 degenerate ids
//     | u64 p | p x i32 pilot labels | u64 rows | u64 cols | rows*cols x f64
//     left singular vectors, column-major (rows = cols = 0 when absent)

struct AssignTask {
  WorkerTask task;
};
struct BroadcastCenters {
  std::vector<std::int32_t> centers;
};
struct ReturnLabels {
  WorkerResult result;
};

using Message = std::variant<AssignTask, BroadcastCenters, ReturnLabels>;

enum class MessageTag : std::uint32_t {
  kAssignTask = 1,
  kBroadcastCenters = 2,
  kReturnLabels = 3,
};

inline constexpr std::size_t kRecordHeaderBytes = 12;

std::vector<std::uint8_t> encode(const Message& message);
/// Throws Error(kProtocol) on truncated or malformed input.
Message decode(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Detection engine

enum class Engine { kSequential, kParallel };

const char* to_string(Engine engine);
Engine parse_engine(const std::string& name);

struct DetectOptions {
  Engine engine = Engine::kSequential;
  bool retain_left_singular = false;
  bool label_pilots = false;
  /// Parallel engine thread count; 0 means hardware concurrency.
  unsigned threads = 0;
  EigOptions eig;
  KMeansOptions kmeans;
};

struct PhaseTimings {
  double master_seconds = 0.0;
  double distribute_seconds = 0.0;
  std::vector<double> worker_seconds;
  double gather_seconds = 0.0;
  double wall_seconds = 0.0;

  /// Master plus every worker's compute time.
  double compute_seconds() const;
};

struct ClusteringResult {
  int num_blocks = 0;
  std::uint64_t seed = 0;
  Labels labels;           // length N
  std::vector<int> owner;  // -1 for pilots (labelled by the master), else worker id
  IndexList pilot_indices;
  std::vector<std::int32_t> center_positions;
  IndexList degenerate_nodes;  // non-pilots with no pilot links
  IndexList isolated_pilots;   // pilots isolated within the pilot graph
  std::vector<std::string> warnings;
  std::size_t broadcast_payload_bytes = 0;
  std::size_t broadcast_record_bytes = 0;
  std::vector<WorkerResult> workers;  // in worker-id order
  PhaseTimings timings;

  /// Everything except timings, encoded with the message conventions.
  /// Equal bytes mean equal results.
  std::vector<std::uint8_t> deterministic_bytes() const;
};

/// Master clustering, one broadcast of the pseudo-center indices, independent
/// worker detection and an ordered gather. Every exchange goes through
/// encode/decode. A failing worker fails the run; the rethrown error keeps its
/// code and names the worker.
ClusteringResult run_detection(const SparseGraph& graph, int k, const PartitionPlan& plan,
                               std::uint64_t seed, const DetectOptions& opts = {});

}  // namespace dcd

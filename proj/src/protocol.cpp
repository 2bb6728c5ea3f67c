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

#include "dcd/protocol.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

namespace dcd {

// ---------------------------------------------------------------------------
// Partition plans

IndexList PartitionPlan::worker_nodes(int m) const {
  IndexList nodes = pilot.indices;
  const auto& local = worker_assignments.at(m);
  nodes.insert(nodes.end(), local.begin(), local.end());
  return nodes;
}

namespace {

// Integer matrix with prescribed row and column sums, close to `target`.
// Floors every cell, then hands out the missing units by descending remainder
// while both the row and the column still need them.
std::vector<std::vector<Index>> round_counts(const Matrix& target,
                                             const std::vector<Index>& row_sums,
                                             const std::vector<Index>& col_sums) {
  const Index rows = target.rows();
  const Index cols = target.cols();
  std::vector<std::vector<Index>> counts(rows, std::vector<Index>(cols));
  std::vector<Index> row_need(row_sums);
  std::vector<Index> col_need(col_sums);
  struct Cell {
    double remainder;
    Index r, c;
  };
  std::vector<Cell> cells;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double exact = std::max(0.0, target(r, c));
      Index base = static_cast<Index>(std::floor(exact));
      base = std::min({base, row_need[r], col_need[c]});
      counts[r][c] = base;
      row_need[r] -= base;
      col_need[c] -= base;
      cells.push_back({exact - std::floor(exact), r, c});
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.remainder > b.remainder; });
  for (const Cell& cell : cells) {
    if (row_need[cell.r] > 0 && col_need[cell.c] > 0) {
      ++counts[cell.r][cell.c];
      --row_need[cell.r];
      --col_need[cell.c];
    }
  }
  // Whatever is left (totals were off by more than rounding) goes greedily.
  for (const Cell& cell : cells) {
    const Index give = std::min(row_need[cell.r], col_need[cell.c]);
    counts[cell.r][cell.c] += give;
    row_need[cell.r] -= give;
    col_need[cell.c] -= give;
  }
  return counts;
}

std::vector<Index> even_sizes(Index total, int parts) {
  std::vector<Index> sizes(parts, total / parts);
  for (Index m = 0; m < total % parts; ++m) ++sizes[m];
  return sizes;
}

}  // namespace

PartitionPlan plan_partition(Index num_nodes, const PilotSet& pilot, int num_workers,
                             const PartitionMode& mode, const GroundTruth* truth,
                             std::uint64_t seed) {
  require(num_workers >= 1, "number of workers must be at least 1");
  std::vector<bool> is_pilot(num_nodes, false);
  for (Index p : pilot.indices) {
    require(p >= 0 && p < num_nodes, "pilot index out of range");
    is_pilot[p] = true;
  }
  IndexList rest;
  for (Index i = 0; i < num_nodes; ++i) {
    if (!is_pilot[i]) rest.push_back(i);
  }

  PartitionPlan plan;
  plan.pilot = pilot;
  plan.mode = mode;
  plan.worker_assignments.resize(num_workers);
  std::mt19937_64 rng(seed);
  const auto sizes = even_sizes(static_cast<Index>(rest.size()), num_workers);

  if (mode.kind == PartitionMode::Kind::kEven) {
    std::shuffle(rest.begin(), rest.end(), rng);
    auto it = rest.begin();
    for (int m = 0; m < num_workers; ++m) {
      plan.worker_assignments[m].assign(it, it + sizes[m]);
      it += sizes[m];
    }
  } else {
    if (truth == nullptr) {
      throw Error(ErrorCode::kInvalidArgument, "proportions mode requires ground truth");
    }
    const Matrix& pi = mode.proportions;
    const int k = truth->num_blocks;
    require(pi.rows() == num_workers && pi.cols() == k,
            "proportions matrix must be M x K");
    for (int m = 0; m < num_workers; ++m) {
      require((pi.row(m).array() >= 0.0).all(), "proportions must be non-negative");
      require(std::abs(pi.row(m).sum() - 1.0) <= 1e-9, "proportion rows must sum to 1");
    }
    std::vector<IndexList> pools(k);
    for (Index i : rest) pools[truth->labels[i]].push_back(i);
    std::vector<Index> available(k);
    for (int b = 0; b < k; ++b) available[b] = static_cast<Index>(pools[b].size());

    Matrix target(num_workers, k);
    for (int m = 0; m < num_workers; ++m) target.row(m) = pi.row(m) * double(sizes[m]);
    for (int b = 0; b < k; ++b) {
      if (std::abs(target.col(b).sum() - double(available[b])) > num_workers) {
        throw Error(ErrorCode::kInvalidArgument,
                    "proportions ask for " + std::to_string(target.col(b).sum()) +
                        " nodes of block " + std::to_string(b) + " but only " +
                        std::to_string(available[b]) + " are available");
      }
    }
    const auto counts = round_counts(target, sizes, available);
    for (int b = 0; b < k; ++b) {
      std::shuffle(pools[b].begin(), pools[b].end(), rng);
      auto it = pools[b].begin();
      for (int m = 0; m < num_workers; ++m) {
        auto& dest = plan.worker_assignments[m];
        dest.insert(dest.end(), it, it + counts[m][b]);
        it += counts[m][b];
      }
    }
  }
  for (auto& w : plan.worker_assignments) std::sort(w.begin(), w.end());
  return plan;
}

WorkerTask extract_subadjacency(const SparseGraph& graph, const PartitionPlan& plan, int m) {
  require(m >= 0 && m < plan.num_workers(), "worker index out of range");
  WorkerTask task;
  task.worker_id = m;
  task.pilot_indices = plan.pilot.indices;
  task.local_indices = plan.worker_assignments[m];
  const Index l = task.num_pilots();
  std::vector<Index> column(graph.num_nodes(), -1);
  for (Index p = 0; p < l; ++p) column[task.pilot_indices[p]] = p;

  std::vector<Eigen::Triplet<double, Index>> triplets;
  auto add_row = [&](Index row, Index node) {
    for (Index j : graph.neighbors(node)) {
      if (column[j] >= 0) triplets.emplace_back(row, column[j], 1.0);
    }
  };
  for (Index p = 0; p < l; ++p) add_row(p, task.pilot_indices[p]);
  for (Index i = 0; i < task.num_local(); ++i) add_row(l + i, task.local_indices[i]);
  task.sub_adjacency.resize(l + task.num_local(), l);
  task.sub_adjacency.setFromTriplets(triplets.begin(), triplets.end());
  return task;
}

// ---------------------------------------------------------------------------
// Wire format

namespace {

class ByteWriter {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

  template <typename T>
  void i64_list(const std::vector<T>& values) {
    u64(values.size());
    for (auto v : values) i64(static_cast<std::int64_t>(v));
  }
  void i32_list(std::span<const int> values) {
    u64(values.size());
    for (int v : values) i32(v);
  }
  void str(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  void put(std::uint64_t v, int width) {
    for (int b = 0; b < width; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  double f64() { return std::bit_cast<double>(get(8)); }

  std::uint64_t count(std::size_t element_bytes) {
    const std::uint64_t n = u64();
    if (element_bytes > 0 && n > remaining() / element_bytes) fail("length exceeds payload");
    return n;
  }
  IndexList i64_list() {
    IndexList v(count(8));
    for (auto& x : v) x = i64();
    return v;
  }
  Labels i32_list() {
    Labels v(count(4));
    for (auto& x : v) x = i32();
    return v;
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) fail("truncated record");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::kProtocol, "message decode: " + what);
  }

 private:
  std::uint64_t get(int width) {
    if (remaining() < static_cast<std::size_t>(width)) fail("truncated record");
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) v |= std::uint64_t{in_[pos_ + b]} << (8 * b);
    pos_ += width;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_payload(ByteWriter& w, const AssignTask& msg) {
  const WorkerTask& t = msg.task;
  w.i32(t.worker_id);
  w.i64_list(t.pilot_indices);
  w.i64_list(t.local_indices);
  SparseMatrix a = t.sub_adjacency;
  a.makeCompressed();
  w.u64(a.rows());
  w.u64(a.cols());
  w.u64(a.nonZeros());
  for (Index r = 0; r <= a.rows(); ++r) w.i64(a.outerIndexPtr()[r]);
  for (Index p = 0; p < a.nonZeros(); ++p) w.i64(a.innerIndexPtr()[p]);
}

void write_payload(ByteWriter& w, const BroadcastCenters& msg) {
  for (std::int32_t c : msg.centers) w.i32(c);
}

void write_payload(ByteWriter& w, const ReturnLabels& msg) {
  const WorkerResult& r = msg.result;
  w.i32(r.worker_id);
  w.i32_list(r.labels);
  w.i64_list(r.degenerate_nodes);
  w.i32_list(r.pilot_labels);
  if (r.left_singular) {
    const Matrix& u = *r.left_singular;
    w.u64(u.rows());
    w.u64(u.cols());
    for (Index i = 0; i < u.size(); ++i) w.f64(u.data()[i]);
  } else {
    w.u64(0);
    w.u64(0);
  }
}

constexpr MessageTag tag_of(const AssignTask&) { return MessageTag::kAssignTask; }
constexpr MessageTag tag_of(const BroadcastCenters&) { return MessageTag::kBroadcastCenters; }
constexpr MessageTag tag_of(const ReturnLabels&) { return MessageTag::kReturnLabels; }

AssignTask read_assign(ByteReader& r) {
  AssignTask msg;
  WorkerTask& t = msg.task;
  t.worker_id = r.i32();
  t.pilot_indices = r.i64_list();
  t.local_indices = r.i64_list();
  const auto rows = static_cast<Index>(r.u64());
  const auto cols = static_cast<Index>(r.u64());
  const auto nnz = static_cast<Index>(r.u64());
  if (static_cast<std::uint64_t>(rows + 1 + nnz) > r.remaining() / 8) {
    ByteReader::fail("sparse block exceeds payload");
  }
  std::vector<Index> offsets(rows + 1);
  for (auto& o : offsets) o = r.i64();
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(nnz);
  if (offsets.front() != 0 || offsets.back() != nnz) ByteReader::fail("bad row offsets");
  for (Index row = 0; row < rows; ++row) {
    if (offsets[row + 1] < offsets[row]) ByteReader::fail("bad row offsets");
    for (Index p = offsets[row]; p < offsets[row + 1]; ++p) {
      const Index col = r.i64();
      if (col < 0 || col >= cols) ByteReader::fail("column out of range");
      triplets.emplace_back(row, col, 1.0);
    }
  }
  t.sub_adjacency.resize(rows, cols);
  t.sub_adjacency.setFromTriplets(triplets.begin(), triplets.end());
  return msg;
}

ReturnLabels read_return(ByteReader& r) {
  ReturnLabels msg;
  WorkerResult& res = msg.result;
  res.worker_id = r.i32();
  res.labels = r.i32_list();
  res.degenerate_nodes = r.i64_list();
  res.pilot_labels = r.i32_list();
  const auto rows = static_cast<Index>(r.u64());
  const auto cols = static_cast<Index>(r.u64());
  if (rows > 0 || cols > 0) {
    if (cols != 0 && static_cast<std::uint64_t>(rows) > r.remaining() / 8 / cols) {
      ByteReader::fail("matrix exceeds payload");
    }
    Matrix u(rows, cols);
    for (Index i = 0; i < u.size(); ++i) u.data()[i] = r.f64();
    res.left_singular = std::move(u);
  }
  return msg;
}

}  // namespace

std::vector<std::uint8_t> encode(const Message& message) {
  return std::visit(
      [](const auto& msg) {
        ByteWriter payload;
        write_payload(payload, msg);
        auto body = payload.take();
        ByteWriter record;
        record.u32(static_cast<std::uint32_t>(tag_of(msg)));
        record.u64(body.size());
        record.bytes(body);
        return record.take();
      },
      message);
}

Message decode(std::span<const std::uint8_t> bytes) {
  ByteReader header(bytes);
  const auto tag = static_cast<MessageTag>(header.u32());
  const std::uint64_t length = header.u64();
  if (length != header.remaining()) ByteReader::fail("payload length mismatch");
  ByteReader r(header.take(length));
  Message out;
  switch (tag) {
    case MessageTag::kAssignTask:
      out = read_assign(r);
      break;
    case MessageTag::kBroadcastCenters: {
      if (length % 4 != 0) ByteReader::fail("center payload not a multiple of 4 bytes");
      BroadcastCenters msg;
      msg.centers.resize(length / 4);
      for (auto& c : msg.centers) c = r.i32();
      out = std::move(msg);
      break;
    }
    case MessageTag::kReturnLabels:
      out = read_return(r);
      break;
    default:
      ByteReader::fail("unknown tag " + std::to_string(static_cast<std::uint32_t>(tag)));
  }
  if (r.remaining() != 0) ByteReader::fail("trailing bytes in payload");
  return out;
}

// ---------------------------------------------------------------------------
// Engine

const char* to_string(Engine engine) {
  return engine == Engine::kSequential ? "sequential" : "parallel";
}

Engine parse_engine(const std::string& name) {
  if (name == "sequential") return Engine::kSequential;
  if (name == "parallel") return Engine::kParallel;
  throw Error(ErrorCode::kInvalidArgument, "unknown engine '" + name + "'");
}

double PhaseTimings::compute_seconds() const {
  return master_seconds + std::accumulate(worker_seconds.begin(), worker_seconds.end(), 0.0);
}

std::vector<std::uint8_t> ClusteringResult::deterministic_bytes() const {
  ByteWriter w;
  w.i32(num_blocks);
  w.u64(seed);
  w.i32_list(labels);
  w.i32_list(owner);
  w.i64_list(pilot_indices);
  w.u64(center_positions.size());
  for (auto c : center_positions) w.i32(c);
  w.i64_list(degenerate_nodes);
  w.i64_list(isolated_pilots);
  w.u64(warnings.size());
  for (const auto& s : warnings) w.str(s);
  w.u64(broadcast_payload_bytes);
  w.u64(broadcast_record_bytes);
  w.u64(workers.size());
  for (const auto& res : workers) w.bytes(encode(ReturnLabels{res}));
  return w.take();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct WorkerOutcome {
  std::vector<std::uint8_t> reply;
  double seconds = 0.0;
  std::exception_ptr error;
};

WorkerOutcome execute_worker(std::span<const std::uint8_t> assign_bytes,
                             std::span<const std::uint8_t> broadcast_bytes, int k,
                             const WorkerOptions& wopts) {
  WorkerOutcome out;
  const auto start = Clock::now();
  try {
    const Message assign = decode(assign_bytes);
    const Message broadcast = decode(broadcast_bytes);
    const auto& task = std::get<AssignTask>(assign).task;
    const auto& centers = std::get<BroadcastCenters>(broadcast).centers;
    WorkerResult result = worker_detect(task, centers, k, wopts);
    out.reply = encode(ReturnLabels{std::move(result)});
  } catch (...) {
    out.error = std::current_exception();
  }
  out.seconds = seconds_since(start);
  return out;
}

[[noreturn]] void rethrow_for_worker(const std::exception_ptr& error, int worker_id) {
  const std::string prefix = "worker " + std::to_string(worker_id) + ": ";
  try {
    std::rethrow_exception(error);
  } catch (const RankDeficient& e) {
    throw RankDeficient(prefix + e.what());
  } catch (const Error& e) {
    throw Error(e.code(), prefix + e.what());
  }
}

}  // namespace

ClusteringResult run_detection(const SparseGraph& graph, int k, const PartitionPlan& plan,
                               std::uint64_t seed, const DetectOptions& opts) {
  const auto wall_start = Clock::now();
  const Index n = graph.num_nodes();
  const int num_workers = plan.num_workers();
  require(num_workers >= 1, "plan must contain at least one worker");
  {
    Index covered = plan.pilot.size();
    for (const auto& w : plan.worker_assignments) covered += static_cast<Index>(w.size());
    require(covered == n, "plan does not cover the graph");
  }

  ClusteringResult result;
  result.num_blocks = k;
  result.seed = seed;
  result.pilot_indices = plan.pilot.indices;

  // Step 1: master.
  auto start = Clock::now();
  const SparseGraph pilot_graph = graph.induced_subgraph(plan.pilot.indices);
  MasterOutput master = master_cluster(pilot_graph, k, seed, opts.eig, opts.kmeans);
  result.timings.master_seconds = seconds_since(start);
  result.center_positions = master.centers.pilot_local_indices;
  result.warnings = master.warnings;
  for (Index p : master.isolated_pilots) result.isolated_pilots.push_back(plan.pilot.indices[p]);

  // Step 2: one broadcast of K indices; tasks are shipped alongside.
  start = Clock::now();
  const auto broadcast = encode(BroadcastCenters{master.centers.pilot_local_indices});
  result.broadcast_record_bytes = broadcast.size();
  result.broadcast_payload_bytes = broadcast.size() - kRecordHeaderBytes;
  std::vector<std::vector<std::uint8_t>> assignments(num_workers);
  for (int m = 0; m < num_workers; ++m) {
    assignments[m] = encode(AssignTask{extract_subadjacency(graph, plan, m)});
  }
  result.timings.distribute_seconds = seconds_since(start);

  // Step 3: workers.
  WorkerOptions wopts;
  wopts.retain_left_singular = opts.retain_left_singular;
  wopts.label_pilots = opts.label_pilots;
  wopts.eig = opts.eig;
  std::vector<WorkerOutcome> outcomes(num_workers);
  if (opts.engine == Engine::kSequential) {
    for (int m = 0; m < num_workers; ++m) {
      outcomes[m] = execute_worker(assignments[m], broadcast, k, wopts);
    }
  } else {
    unsigned threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(num_workers));
    std::mutex queue_lock;
    int next = 0;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          int m;
          {
            std::lock_guard<std::mutex> guard(queue_lock);
            if (next >= num_workers) return;
            m = next++;
          }
          outcomes[m] = execute_worker(assignments[m], broadcast, k, wopts);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (int m = 0; m < num_workers; ++m) {
    if (outcomes[m].error) rethrow_for_worker(outcomes[m].error, m);
  }

  // Gather in worker-id order.
  start = Clock::now();
  result.labels.assign(n, -1);
  result.owner.assign(n, -1);
  for (std::size_t p = 0; p < plan.pilot.indices.size(); ++p) {
    result.labels[plan.pilot.indices[p]] = master.centers.master_labels[p];
  }
  for (int m = 0; m < num_workers; ++m) {
    result.timings.worker_seconds.push_back(outcomes[m].seconds);
    Message reply = decode(outcomes[m].reply);
    WorkerResult& wr = std::get<ReturnLabels>(reply).result;
    const auto& local = plan.worker_assignments[m];
    if (wr.worker_id != m || wr.labels.size() != local.size()) {
      throw Error(ErrorCode::kProtocol, "worker " + std::to_string(m) + " returned a bad reply");
    }
    for (std::size_t i = 0; i < local.size(); ++i) {
      result.labels[local[i]] = wr.labels[i];
      result.owner[local[i]] = m;
    }
    result.degenerate_nodes.insert(result.degenerate_nodes.end(), wr.degenerate_nodes.begin(),
                                   wr.degenerate_nodes.end());
    result.workers.push_back(std::move(wr));
  }
  std::sort(result.degenerate_nodes.begin(), result.degenerate_nodes.end());
  if (std::find(result.labels.begin(), result.labels.end(), -1) != result.labels.end()) {
    throw Error(ErrorCode::kProtocol, "gathered labels do not cover every node");
  }
  result.timings.gather_seconds = seconds_since(start);
  result.timings.wall_seconds = seconds_since(wall_start);
  return result;
}

}  // namespace dcd

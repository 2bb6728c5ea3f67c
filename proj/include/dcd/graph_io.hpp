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

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcd/common.hpp"
#include "dcd/metrics.hpp"
#include "dcd/protocol.hpp"
#include "dcd/sbm_model.hpp"

namespace dcd {

// Edge-list text format
//
//   # comment lines start with '#'; blank lines are ignored
//   # nodes <N>          optional directive, see below
//   <u> <v>              one edge per line, whitespace separated integers
//
// Edges are symmetrized, duplicates collapse and self-loops are dropped. Ids are
// 0-based or 1-based as declared by the caller. Without a `# nodes` directive
// the distinct ids are compacted to 0..N-1 in increasing order; with it, ids
// are taken as-is and must lie in [0, N), so isolated nodes survive a save/load
// round trip.

enum class IdBase { kZero, kOne };

IdBase parse_id_base(const std::string& name);

struct LoadedGraph {
  SparseGraph graph;
  IndexList id_map;  // compact id -> id in the file
  Index self_loops_dropped = 0;
  Index duplicate_edges = 0;
};

LoadedGraph parse_edge_list(std::istream& in, IdBase base = IdBase::kZero,
                            const std::string& source = "<stream>");
LoadedGraph load_edge_list(const std::filesystem::path& path, IdBase base = IdBase::kZero);

/// Writes the `# nodes` directive followed by every edge u < v, 0-based.
void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path);

// Label files: one "<node> <label>" or "<node>,<label>" pair per line; an
// optional non-numeric header line (such as "node,label") is skipped.

struct LoadedLabels {
  GroundTruth truth;
  std::vector<std::pair<Index, int>> dictionary;  // label in file -> compact label
};

/// Aligns labels with `id_map` (compact id -> file id). Throws
/// Error(kMissingLabel) naming the ids without a label.
LoadedLabels parse_labels(std::istream& in, const IndexList& id_map,
                          const std::string& source = "<stream>");
LoadedLabels load_labels(const std::filesystem::path& path, const IndexList& id_map);

/// "node,label" with a header; node ids are taken from id_map when given.
void save_labels(const Labels& labels, const std::filesystem::path& path,
                 const IndexList* id_map = nullptr);

/// Flat "key=value" text, one entry per line, order preserved.
using Manifest = std::vector<std::pair<std::string, std::string>>;

std::string manifest_get(const Manifest& manifest, const std::string& key,
                         const std::string& fallback = {});
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);
Manifest parse_manifest(std::istream& in, const std::string& source = "<stream>");

/// Writes labels.csv, report.csv and manifest.txt into `dir`. The manifest is
/// `run_config` followed by the result's seeds, warnings and timings.
void save_result(const ClusteringResult& result, const EvalReport& report,
                 const Manifest& run_config, const std::filesystem::path& dir,
                 const IndexList* id_map = nullptr);

}  // namespace dcd

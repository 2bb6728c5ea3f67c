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

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dcd/experiments.hpp"
#include "dcd/graph_io.hpp"

using namespace dcd;
namespace fs = std::filesystem;

namespace {

LoadedGraph parse(const std::string& text, IdBase base = IdBase::kZero) {
  std::istringstream in(text);
  return parse_edge_list(in, base, "test");
}

LoadedLabels labels_of(const std::string& text, const IndexList& ids) {
  std::istringstream in(text);
  return parse_labels(in, ids, "labels");
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("dcd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("edge list examples") {
  const LoadedGraph path = parse("0 1\n1 2\n");
  CHECK(path.graph.num_nodes() == 3);
  CHECK(path.graph.num_edges() == 2);

  const LoadedGraph loop = parse("0 1\n1 0\n0 0\n");
  CHECK(loop.graph.num_edges() == 1);
  CHECK(loop.self_loops_dropped == 1);
  CHECK(loop.duplicate_edges == 1);

  const LoadedGraph sparse_ids = parse("5 9\n9 100\n");
  CHECK(sparse_ids.graph.num_nodes() == 3);
  CHECK(sparse_ids.id_map == IndexList{5, 9, 100});
  CHECK(sparse_ids.graph.has_edge(1, 2));
}

TEST_CASE("edge list parsing is tolerant of whitespace and comments") {
  const LoadedGraph g = parse("# header\n\n0\t1   \n  1 2\r\n\n# tail\n");
  CHECK(g.graph.num_edges() == 2);
  const LoadedGraph one = parse("1 2\n2 3\n", IdBase::kOne);
  CHECK(one.id_map == IndexList{1, 2, 3});
  const LoadedGraph declared = parse("# nodes 5\n0 1\n");
  CHECK(declared.graph.num_nodes() == 5);
  CHECK(declared.graph.degree(4) == 0);
}

TEST_CASE("edge list errors") {
  auto code_of = [](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  CHECK(code_of("0 1\n1 x\n") == ErrorCode::kParseError);
  CHECK(code_of("0 1 2\n") == ErrorCode::kParseError);
  CHECK(code_of("-1 2\n") == ErrorCode::kParseError);
  CHECK(code_of("# nodes 2\n0 5\n") == ErrorCode::kParseError);
  CHECK(code_of("# only comments\n") == ErrorCode::kEmptyGraph);
  CHECK(code_of("") == ErrorCode::kEmptyGraph);
  try {
    parse("0 1\n\n2 q\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("test:3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_edge_list("/nonexistent/graph.txt"), Error);
}

TEST_CASE("edge list save/load round trip on a generated SBM") {
  const fs::path dir = scratch_dir("roundtrip");
  const SbmSample s = sample_sbm(balanced_sbm(500, 3, 0.1, 0.5), 2);
  save_edge_list(s.graph, dir / "g.txt");
  const LoadedGraph back = load_edge_list(dir / "g.txt");
  CHECK(back.graph == s.graph);
  CHECK(back.duplicate_edges == 0);

  // Isolated nodes survive thanks to the node-count directive.
  std::vector<std::pair<Index, Index>> e = {{0, 3}};
  const SparseGraph iso = SparseGraph::from_edges(6, e);
  save_edge_list(iso, dir / "iso.txt");
  CHECK(load_edge_list(dir / "iso.txt").graph == iso);
}

TEST_CASE("labels") {
  const IndexList ids = {0, 1, 2, 3};
  const LoadedLabels ok = labels_of("node,label\n0,7\n1,7\n2,3\n3,9\n", ids);
  CHECK(ok.truth.labels == Labels{1, 1, 0, 2});
  CHECK(ok.truth.num_blocks == 3);
  CHECK(ok.dictionary ==
        std::vector<std::pair<Index, int>>{{3, 0}, {7, 1}, {9, 2}});

  const LoadedLabels ws = labels_of("0 0\n1 1\n2 0\n3 1\n99 1\n", ids);
  CHECK(ws.truth.labels == Labels{0, 1, 0, 1});

  try {
    labels_of("0 0\n1 1\n3 1\n", ids);
    FAIL("expected MissingLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingLabel);
    CHECK(std::string(e.what()).find(": 2") != std::string::npos);
  }
  CHECK_THROWS_AS(labels_of("0 0\n1 one\n", ids), Error);
}

TEST_CASE("save_labels round trip through the id map") {
  const fs::path dir = scratch_dir("labels");
  const IndexList ids = {5, 9, 100};
  save_labels({2, 0, 1}, dir / "l.csv", &ids);
  CHECK(load_labels(dir / "l.csv", ids).truth.labels == Labels{2, 0, 1});
  save_labels({1, 1, 0}, dir / "plain.csv");
  CHECK(load_labels(dir / "plain.csv", IndexList{0, 1, 2}).truth.labels == Labels{1, 1, 0});
}

TEST_CASE("manifest text") {
  std::istringstream in("# c\na = 1\nb=x=y\n\n");
  const Manifest m = parse_manifest(in);
  CHECK(manifest_get(m, "a") == "1");
  CHECK(manifest_get(m, "b") == "x=y");
  CHECK(manifest_get(m, "c", "none") == "none");
  std::istringstream bad("novalue\n");
  CHECK_THROWS_AS(parse_manifest(bad), Error);
}

TEST_CASE("save_result writes files and replays byte-identically") {
  const fs::path dir = scratch_dir("result");
  const SbmSample s = sample_sbm(balanced_sbm(600, 3, 0.2, 0.5), 5);
  DetectConfig config;
  config.num_blocks = 3;
  config.pilot_ratio = 0.2;
  config.num_workers = 3;
  config.seed = 42;
  const DetectRun run = detect(s.graph, &s.truth, config);
  const EvalReport report = evaluate(s.graph, run.result, run.plan, &s.truth, nullptr);
  save_result(run.result, report, config.to_manifest(), dir);

  CHECK(fs::exists(dir / "labels.csv"));
  CHECK(fs::exists(dir / "report.csv"));
  const Manifest manifest = read_manifest(dir / "manifest.txt");
  CHECK(manifest_get(manifest, "result.broadcast_payload_bytes") == "12");
  CHECK(!manifest_get(manifest, "timing.wall_seconds").empty());
  CHECK(load_labels(dir / "labels.csv", [] {
          IndexList ids(600);
          std::iota(ids.begin(), ids.end(), 0);
          return ids;
        }())
            .truth.labels.size() == 600);

  const DetectConfig replay = DetectConfig::from_manifest(manifest);
  const DetectRun again = detect(s.graph, &s.truth, replay);
  CHECK(again.result.labels == run.result.labels);
  CHECK(again.result.deterministic_bytes() == run.result.deterministic_bytes());

  CHECK_THROWS_AS(save_result(ClusteringResult{}, report, {}, dir), Error);
}

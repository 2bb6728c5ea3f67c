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

#include "dcd/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dcd {

namespace {

[[noreturn]] void parse_error(const std::string& source, Index line, const std::string& what) {
  throw Error(ErrorCode::kParseError, source + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view s, bool allow_comma) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  auto is_sep = [&](char c) {
    return c == ' ' || c == '\t' || c == '\r' || (allow_comma && c == ',');
  };
  while (pos < s.size()) {
    while (pos < s.size() && is_sep(s[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && !is_sep(s[pos])) ++pos;
    if (pos > start) out.push_back(s.substr(start, pos - start));
  }
  return out;
}

bool parse_int(std::string_view token, Index& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace

IdBase parse_id_base(const std::string& name) {
  if (name == "0" || name == "zero") return IdBase::kZero;
  if (name == "1" || name == "one") return IdBase::kOne;
  throw Error(ErrorCode::kInvalidArgument, "id base must be 0 or 1, got '" + name + "'");
}

LoadedGraph parse_edge_list(std::istream& in, IdBase base, const std::string& source) {
  const Index offset = base == IdBase::kOne ? 1 : 0;
  Index declared_nodes = -1;
  std::vector<std::pair<Index, Index>> raw;
  LoadedGraph out;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto fields = split_fields(text.substr(1), false);
      if (fields.size() == 2 && fields[0] == "nodes") {
        if (!parse_int(fields[1], declared_nodes) || declared_nodes < 0) {
          parse_error(source, line_no, "bad '# nodes' directive");
        }
      }
      continue;
    }
    const auto fields = split_fields(text, false);
    if (fields.size() != 2) parse_error(source, line_no, "expected two node ids");
    Index u = 0, v = 0;
    if (!parse_int(fields[0], u) || !parse_int(fields[1], v)) {
      parse_error(source, line_no, "node ids must be integers");
    }
    u -= offset;
    v -= offset;
    if (u < 0 || v < 0) parse_error(source, line_no, "node ids must be non-negative");
    if (declared_nodes >= 0 && (u >= declared_nodes || v >= declared_nodes)) {
      parse_error(source, line_no, "node id exceeds the '# nodes' directive");
    }
    if (u == v) {
      ++out.self_loops_dropped;
      continue;
    }
    raw.emplace_back(u, v);
  }

  Index num_nodes = 0;
  if (declared_nodes >= 0) {
    num_nodes = declared_nodes;
    out.id_map.resize(num_nodes);
    for (Index i = 0; i < num_nodes; ++i) out.id_map[i] = i + offset;
  } else {
    IndexList ids;
    ids.reserve(2 * raw.size());
    for (const auto& [u, v] : raw) {
      ids.push_back(u);
      ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (auto& [u, v] : raw) {
      u = std::lower_bound(ids.begin(), ids.end(), u) - ids.begin();
      v = std::lower_bound(ids.begin(), ids.end(), v) - ids.begin();
    }
    num_nodes = static_cast<Index>(ids.size());
    out.id_map = std::move(ids);
    for (auto& id : out.id_map) id += offset;
  }
  if (num_nodes == 0) throw Error(ErrorCode::kEmptyGraph, source + ": no nodes");
  out.graph = SparseGraph::from_edges(num_nodes, raw);
  out.duplicate_edges = static_cast<Index>(raw.size()) - out.graph.num_edges();
  return out;
}

LoadedGraph load_edge_list(const std::filesystem::path& path, IdBase base) {
  auto in = open_input(path);
  return parse_edge_list(in, base, path.string());
}

void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# dcd edge list, 0-based\n# nodes " << graph.num_nodes() << '\n';
  for (Index i = 0; i < graph.num_nodes(); ++i) {
    for (Index j : graph.neighbors(i)) {
      if (j > i) out << i << ' ' << j << '\n';
    }
  }
  finish(out, path);
}

LoadedLabels parse_labels(std::istream& in, const IndexList& id_map, const std::string& source) {
  // id_map is increasing (both compaction and the directive keep order).
  const Index n = static_cast<Index>(id_map.size());
  std::vector<Index> raw(n, 0);
  std::vector<bool> seen(n, false);
  std::string line;
  Index line_no = 0;
  bool first_record = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text, true);
    Index node = 0, label = 0;
    const bool numeric =
        fields.size() == 2 && parse_int(fields[0], node) && parse_int(fields[1], label);
    if (!numeric) {
      if (first_record) {
        first_record = false;
        continue;  // header
      }
      parse_error(source, line_no, "expected '<node> <label>'");
    }
    first_record = false;
    auto it = std::lower_bound(id_map.begin(), id_map.end(), node);
    if (it == id_map.end() || *it != node) continue;  // node not in the graph
    const Index compact = it - id_map.begin();
    raw[compact] = label;
    seen[compact] = true;
  }

  std::vector<Index> missing;
  for (Index i = 0; i < n; ++i) {
    if (!seen[i]) missing.push_back(id_map[i]);
  }
  if (!missing.empty()) {
    std::string names;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
      names += (i ? ", " : "") + std::to_string(missing[i]);
    }
    if (missing.size() > 20) names += ", ...";
    throw Error(ErrorCode::kMissingLabel, source + ": " + std::to_string(missing.size()) +
                                              " node(s) without a label: " + names);
  }

  std::vector<Index> distinct(raw.begin(), raw.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  LoadedLabels out;
  out.truth.num_blocks = static_cast<int>(distinct.size());
  out.truth.labels.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.truth.labels[i] =
        static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), raw[i]) -
                         distinct.begin());
  }
  for (std::size_t c = 0; c < distinct.size(); ++c) {
    out.dictionary.emplace_back(distinct[c], static_cast<int>(c));
  }
  return out;
}

LoadedLabels load_labels(const std::filesystem::path& path, const IndexList& id_map) {
  auto in = open_input(path);
  return parse_labels(in, id_map, path.string());
}

void save_labels(const Labels& labels, const std::filesystem::path& path,
                 const IndexList* id_map) {
  auto out = open_output(path);
  out << "node,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << (id_map ? (*id_map)[i] : static_cast<Index>(i)) << ',' << labels[i] << '\n';
  }
  finish(out, path);
}

std::string manifest_get(const Manifest& manifest, const std::string& key,
                         const std::string& fallback) {
  for (const auto& [k, v] : manifest) {
    if (k == key) return v;
  }
  return fallback;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& [k, v] : manifest) out << k << '=' << v << '\n';
  finish(out, path);
}

Manifest parse_manifest(std::istream& in, const std::string& source) {
  Manifest out;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) parse_error(source, line_no, "expected key=value");
    out.emplace_back(std::string(trim(text.substr(0, eq))),
                     std::string(trim(text.substr(eq + 1))));
  }
  return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_manifest(in, path.string());
}

void save_result(const ClusteringResult& result, const EvalReport& report,
                 const Manifest& run_config, const std::filesystem::path& dir,
                 const IndexList* id_map) {
  if (result.labels.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "save_result: result has no labels");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  save_labels(result.labels, dir / "labels.csv", id_map);
  {
    const auto path = dir / "report.csv";
    auto out = open_output(path);
    out << report_csv_header() << '\n' << report_csv_row(report) << '\n';
    finish(out, path);
  }

  Manifest manifest = run_config;
  auto put = [&](const std::string& k, const std::string& v) { manifest.emplace_back(k, v); };
  auto seconds = [](double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return std::string(buf);
  };
  put("result.seed", std::to_string(result.seed));
  put("result.num_nodes", std::to_string(result.labels.size()));
  put("result.num_pilots", std::to_string(result.pilot_indices.size()));
  put("result.num_workers", std::to_string(result.workers.size()));
  std::string centers;
  for (std::size_t c = 0; c < result.center_positions.size(); ++c) {
    centers += (c ? ";" : "") + std::to_string(result.center_positions[c]);
  }
  put("result.center_positions", centers);
  put("result.broadcast_payload_bytes", std::to_string(result.broadcast_payload_bytes));
  put("result.degenerate_nodes", std::to_string(result.degenerate_nodes.size()));
  put("result.isolated_pilots", std::to_string(result.isolated_pilots.size()));
  for (std::size_t w = 0; w < result.warnings.size(); ++w) {
    put("result.warning." + std::to_string(w), result.warnings[w]);
  }
  put("timing.master_seconds", seconds(result.timings.master_seconds));
  put("timing.distribute_seconds", seconds(result.timings.distribute_seconds));
  for (std::size_t m = 0; m < result.timings.worker_seconds.size(); ++m) {
    put("timing.worker_seconds." + std::to_string(m), seconds(result.timings.worker_seconds[m]));
  }
  put("timing.gather_seconds", seconds(result.timings.gather_seconds));
  put("timing.wall_seconds", seconds(result.timings.wall_seconds));
  write_manifest(manifest, dir / "manifest.txt");
}

}  // namespace dcd

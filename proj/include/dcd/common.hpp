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
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dcd {

using Index = std::int64_t;
using Labels = std::vector<int>;
using IndexList = std::vector<Index>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Machine-readable error categories. The CLI prints these as `error=<name>`.
enum class ErrorCode {
  kInvalidArgument,
  kRankDeficient,
  kNoConvergence,
  kEmptyCluster,
  kInvalidCenters,
  kDivisionByZero,
  kParseError,
  kEmptyGraph,
  kMissingLabel,
  kIo,
  kProtocol,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what)
      : Error(ErrorCode::kRankDeficient, what) {}
};

/// Throws Error(kInvalidArgument) unless `cond` holds.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kInvalidArgument, what);
}

/// splitmix64 finalizer; used to derive independent child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed `stream` of `parent`. derive_seed(s, a, b) == derive_seed(derive_seed(s, a), b).
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return splitmix64(parent ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream, Rest... rest) {
  return derive_seed(derive_seed(parent, stream), rest...);
}

}  // namespace dcd

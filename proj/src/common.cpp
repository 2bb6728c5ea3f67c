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

#include "dcd/common.hpp"

namespace dcd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kInvalidCenters: return "InvalidCenters";
    case ErrorCode::kDivisionByZero: return "DivisionByZero";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyGraph: return "EmptyGraph";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kProtocol: return "ProtocolError";
  }
  return "Unknown";
}

}  // namespace dcd

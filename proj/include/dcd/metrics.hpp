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

#include <optional>
#include <string>
#include <vector>

#include "dcd/common.hpp"
#include "dcd/protocol.hpp"
#include "dcd/sbm_model.hpp"

namespace dcd {

struct MatchedRate {
  double rate = 0.0;
  /// permutation[e] is the truth label matched to estimated label e.
  std::vector<int> permutation;
};

/// Fraction of disagreeing nodes after the best relabelling of `estimated`.
/// Exhaustive over all K! permutations for K <= 8, Hungarian above.
MatchedRate misclustering_rate(const Labels& estimated, const Labels& truth, int k);

/// Maximum-weight perfect matching on a square matrix (Hungarian, O(K^3)).
/// Returns assignment[row] = column.
std::vector<int> max_weight_assignment(const Matrix& weight);

/// Best permutation by brute-force enumeration; exposed for cross-checks.
std::vector<int> max_weight_assignment_exhaustive(const Matrix& weight);

/// K x K confusion counts: entry (e, t) = #{i : estimated_i = e, truth_i = t}.
Matrix confusion_matrix(const Labels& estimated, const Labels& truth, int k);

/// Natural log of the Procrustes-minimal residual ||estimated - population Q||_F.
/// An exact fit returns -infinity.
double lee(const Matrix& estimated, const Matrix& population);

/// Between-community edge density over within-community edge density, over
/// unordered pairs i < j. Throws Error(kInvalidArgument) with fewer than two
/// non-empty clusters or no within pairs, Error(kDivisionByZero) when the
/// within density is zero.
double relative_density(const SparseGraph& graph, const Labels& labels);

/// max_k | nbar_mk / nbar_m - m_k / N | per worker, pilots counted into S_m.
std::vector<double> unbalance_alpha(const PartitionPlan& plan, const GroundTruth& truth);

struct EvalReport {
  double misclustering_rate = 0.0;
  std::vector<double> per_worker_rates;
  std::optional<double> lee;
  std::optional<double> red;
  std::vector<double> alpha;
  std::vector<int> matching_permutation;
};

/// Rates and alpha against ground truth; LEE when the result retained left
/// singular vectors; RED always.
EvalReport evaluate(const SparseGraph& graph, const ClusteringResult& result,
                    const PartitionPlan& plan, const GroundTruth* truth,
                    const Matrix* connectivity);

/// Column order of report_csv_row.
std::string report_csv_header();
/// Vector-valued fields are ';'-joined; absent optionals are empty.
std::string report_csv_row(const EvalReport& report);

}  // namespace dcd

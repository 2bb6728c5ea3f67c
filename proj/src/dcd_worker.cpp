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

#include "dcd/dcd_worker.hpp"

#include <algorithm>
#include <limits>

namespace dcd {

namespace {

int nearest_row(const Matrix& embedding, Index row, const Matrix& center_rows) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < center_rows.rows(); ++c) {
    const double d = (embedding.row(row) - center_rows.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

WorkerResult worker_detect(const WorkerTask& task, std::span<const std::int32_t> centers, int k,
                           const WorkerOptions& opts) {
  const Index l = task.num_pilots();
  const Index n_local = task.num_local();
  require(task.sub_adjacency.rows() == l + n_local && task.sub_adjacency.cols() == l,
          "worker task: sub_adjacency must be (l + n_m) x l");
  if (static_cast<int>(centers.size()) != k) {
    throw Error(ErrorCode::kInvalidCenters, "expected exactly K pseudo centers");
  }
  for (std::int32_t c : centers) {
    if (c < 0 || c >= l) {
      throw Error(ErrorCode::kInvalidCenters,
                  "pseudo center " + std::to_string(c) + " outside [0, l)");
    }
  }

  RectLaplacian lap = laplacian_rect(task.sub_adjacency);
  SvdTriple svd = gram_svd(lap.matrix, k, opts.eig);

  Matrix center_rows(k, k);
  for (int c = 0; c < k; ++c) center_rows.row(c) = svd.left.row(centers[c]);

  WorkerResult out;
  out.worker_id = task.worker_id;
  out.labels.assign(n_local, 0);
  std::vector<bool> degenerate(l + n_local, false);
  for (Index r : lap.zero_rows) degenerate[r] = true;
  for (Index i = 0; i < n_local; ++i) {
    const Index row = l + i;
    if (degenerate[row]) {
      out.degenerate_nodes.push_back(task.local_indices[i]);
      continue;  // label 0
    }
    out.labels[i] = nearest_row(svd.left, row, center_rows);
  }
  if (opts.label_pilots) {
    out.pilot_labels.assign(l, 0);
    for (Index r = 0; r < l; ++r) {
      if (!degenerate[r]) out.pilot_labels[r] = nearest_row(svd.left, r, center_rows);
    }
  }
  if (opts.retain_left_singular) out.left_singular = std::move(svd.left);
  return out;
}

Matrix embed_population(const Matrix& theta_sub, const Matrix& theta_pilot,
                        const Matrix& connectivity) {
  const Index k = connectivity.rows();
  require(connectivity.cols() == k, "connectivity must be square");
  require(theta_sub.cols() == k && theta_pilot.cols() == k,
          "membership matrices must have K columns");
  const Vector sub_counts = theta_sub.colwise().sum().transpose();
  const Vector pilot_counts = theta_pilot.colwise().sum().transpose();
  if ((sub_counts.array() <= 0).any() || (pilot_counts.array() <= 0).any()) {
    throw RankDeficient("embed_population: every block needs members in S_m and in the pilots");
  }
  // Expected row degrees depend on the row block, column degrees on the column block.
  const Vector row_degree = connectivity * pilot_counts;
  const Vector col_degree = connectivity * sub_counts;
  if ((row_degree.array() <= 0).any() || (col_degree.array() <= 0).any()) {
    throw RankDeficient("embed_population: zero expected degree");
  }
  const Matrix core = (sub_counts.cwiseSqrt().cwiseQuotient(row_degree.cwiseSqrt())).asDiagonal() *
                      connectivity *
                      (pilot_counts.cwiseSqrt().cwiseQuotient(col_degree.cwiseSqrt())).asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeFullU);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(k - 1) <= kRankTolerance * s(0)) {
    throw RankDeficient("embed_population: connectivity core is rank deficient");
  }
  const Matrix psi = theta_sub * sub_counts.cwiseSqrt().cwiseInverse().asDiagonal();
  return psi * svd.matrixU();
}

}  // namespace dcd

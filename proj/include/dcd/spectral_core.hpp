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

#include <cmath>
#include <cstdint>
#include <functional>

#include "dcd/common.hpp"
#include "dcd/sbm_model.hpp"

namespace dcd {

/// D^{-1/2} A D^{-1/2}; zero-degree rows/columns stay zero and are listed.
struct SquareLaplacian {
  SparseMatrix matrix;
  IndexList isolated;
};

/// D^{-1/2} A F^{-1/2} with D the row sums and F the column sums.
struct RectLaplacian {
  SparseMatrix matrix;
  IndexList zero_rows;
  IndexList zero_cols;
};

SquareLaplacian laplacian_square(const SparseGraph& graph);
RectLaplacian laplacian_rect(const SparseMatrix& sub_adjacency);

struct EigPair {
  Vector values;   // ordered by descending |value|, ties by descending value
  Matrix vectors;  // orthonormal columns
};

struct EigOptions {
  /// Problems up to this size use a dense symmetric solver.
  Index dense_limit = 2048;
  /// Largest Krylov basis the Lanczos path may grow to.
  Index max_krylov = 1500;
  /// Required ||L v - lambda v|| / max(1, |lambda|).
  double residual_tol = 1e-9;
  std::uint64_t seed = 0x5eed;
};

/// Top-K eigenpairs of a symmetric matrix by absolute eigenvalue.
EigPair top_k_eig_sym(const Matrix& sym, int k, const EigOptions& opts = {});
EigPair top_k_eig_sym(const SparseMatrix& sym, int k, const EigOptions& opts = {});

/// Lanczos with full reorthogonalization on an implicit symmetric operator
/// `apply(x, y)` computing y = A x. Throws Error(kNoConvergence) if the
/// basis hits `opts.max_krylov` before every requested pair converges.
EigPair lanczos_top_k(Index n, const std::function<void(const Vector&, Vector&)>& apply,
                      int k, const EigOptions& opts = {});

struct SvdTriple {
  Matrix left;      // n x K
  Vector singular;  // positive, descending
  Matrix right;     // l x K
};

/// Truncated SVD through the l x l Gram matrix: eigendecompose L^T L = V S^2 V^T,
/// then lift U = L V S^{-1}. Throws RankDeficient when s_K <= 1e-8 s_1.
SvdTriple gram_svd(const SparseMatrix& rect, int k, const EigOptions& opts = {});
SvdTriple gram_svd(const Matrix& rect, int k, const EigOptions& opts = {});

inline constexpr double kRankTolerance = 1e-8;

struct KMeansOptions {
  int restarts = 10;
  int max_iterations = 100;
  double relative_tolerance = 1e-8;
};

struct KMeansResult {
  Labels labels;
  Matrix centers;  // K x d, row k is the mean of cluster k
  double objective = 0.0;
};

/// Lloyd's algorithm from k-means++ seeds; best restart by objective.
KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KMeansOptions& opts = {});

/// Spectral clustering of a whole graph: Laplacian, top-K eigenvectors,
/// k-means. Throws RankDeficient when |lambda_K| <= 1e-8 |lambda_1|.
struct SpectralClustering {
  Labels labels;
  Matrix embedding;  // N x K top eigenvectors of the Laplacian
  Vector eigenvalues;
  Matrix centers;  // k-means centers in embedding space
  IndexList isolated;
};

SpectralClustering spectral_cluster(const SparseGraph& graph, int k, std::uint64_t seed,
                                    const EigOptions& eig = {},
                                    const KMeansOptions& km = {});

struct Procrustes {
  Matrix rotation;
  double residual = 0.0;
};

/// Orthogonal Q minimizing ||estimate - reference Q||_F, from the SVD of
/// reference^T estimate.
template <typename DerivedA, typename DerivedB>
Procrustes procrustes_align(const Eigen::MatrixBase<DerivedA>& estimate,
                            const Eigen::MatrixBase<DerivedB>& reference) {
  require(estimate.rows() == reference.rows() && estimate.cols() == reference.cols(),
          "procrustes_align: shape mismatch");
  const Matrix cross = reference.transpose() * estimate;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Procrustes out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (estimate - reference * out.rotation).norm();
  return out;
}

/// Largest principal angle between the column spaces of a and b, computed from
/// the sine form so that tiny angles keep full precision.
template <typename DerivedA, typename DerivedB>
double max_principal_angle(const Eigen::MatrixBase<DerivedA>& a,
                           const Eigen::MatrixBase<DerivedB>& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "principal angles: shape mismatch");
  const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() *
                    Matrix::Identity(a.rows(), a.cols());
  const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() *
                    Matrix::Identity(b.rows(), b.cols());
  const Matrix residual = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const double s = std::min(1.0, svd.singularValues()(0));
  return std::asin(s);
}

}  // namespace dcd

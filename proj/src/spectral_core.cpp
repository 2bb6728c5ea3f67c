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

#include "dcd/spectral_core.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <random>

namespace dcd {

// ---------------------------------------------------------------------------
// Laplacians

SquareLaplacian laplacian_square(const SparseGraph& graph) {
  const Index n = graph.num_nodes();
  Vector inv_sqrt(n);
  SquareLaplacian out;
  for (Index i = 0; i < n; ++i) {
    const Index d = graph.degree(i);
    inv_sqrt(i) = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    if (d == 0) out.isolated.push_back(i);
  }
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(graph.col_indices().size());
  for (Index i = 0; i < n; ++i) {
    for (Index j : graph.neighbors(i)) triplets.emplace_back(i, j, inv_sqrt(i) * inv_sqrt(j));
  }
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

RectLaplacian laplacian_rect(const SparseMatrix& sub_adjacency) {
  const Index rows = sub_adjacency.rows();
  const Index cols = sub_adjacency.cols();
  Vector row_sum = Vector::Zero(rows);
  Vector col_sum = Vector::Zero(cols);
  for (Index i = 0; i < sub_adjacency.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(sub_adjacency, i); it; ++it) {
      require(it.value() == 0.0 || it.value() == 1.0,
              "laplacian_rect: entries must be 0 or 1");
      row_sum(it.row()) += it.value();
      col_sum(it.col()) += it.value();
    }
  }
  RectLaplacian out;
  Vector row_scale(rows);
  Vector col_scale(cols);
  for (Index i = 0; i < rows; ++i) {
    row_scale(i) = row_sum(i) > 0 ? 1.0 / std::sqrt(row_sum(i)) : 0.0;
    if (row_sum(i) == 0) out.zero_rows.push_back(i);
  }
  for (Index j = 0; j < cols; ++j) {
    col_scale(j) = col_sum(j) > 0 ? 1.0 / std::sqrt(col_sum(j)) : 0.0;
    if (col_sum(j) == 0) out.zero_cols.push_back(j);
  }
  out.matrix = row_scale.asDiagonal() * sub_adjacency * col_scale.asDiagonal();
  out.matrix.prune(0.0);
  return out;
}

// ---------------------------------------------------------------------------
// Eigensolvers

namespace {

std::vector<Index> order_by_magnitude(const Vector& values) {
  std::vector<Index> order(values.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(values(a));
    const double mb = std::abs(values(b));
    if (ma != mb) return ma > mb;
    return values(a) > values(b);
  });
  return order;
}

EigPair select_top(const Vector& values, const Matrix& vectors, int k) {
  const auto order = order_by_magnitude(values);
  EigPair out;
  out.values.resize(k);
  out.vectors.resize(vectors.rows(), k);
  for (int c = 0; c < k; ++c) {
    out.values(c) = values(order[c]);
    out.vectors.col(c) = vectors.col(order[c]);
  }
  return out;
}

void check_rank_request(Index n, int k) {
  require(k >= 1, "K must be at least 1");
  require(k <= n, "K must not exceed the matrix dimension");
}

}  // namespace

EigPair top_k_eig_sym(const Matrix& sym, int k, const EigOptions& opts) {
  require(sym.rows() == sym.cols(), "top_k_eig_sym: matrix must be square");
  check_rank_request(sym.rows(), k);
  require((sym - sym.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          "top_k_eig_sym: matrix must be symmetric");
  if (sym.rows() <= opts.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::kNoConvergence, "dense symmetric eigensolver failed");
    }
    return select_top(solver.eigenvalues(), solver.eigenvectors(), k);
  }
  return lanczos_top_k(
      sym.rows(), [&](const Vector& x, Vector& y) { y.noalias() = sym * x; }, k, opts);
}

EigPair top_k_eig_sym(const SparseMatrix& sym, int k, const EigOptions& opts) {
  require(sym.rows() == sym.cols(), "top_k_eig_sym: matrix must be square");
  check_rank_request(sym.rows(), k);
  if (sym.rows() <= opts.dense_limit) return top_k_eig_sym(Matrix(sym), k, opts);
  SparseMatrix asym = sym - SparseMatrix(sym.transpose());
  require(asym.nonZeros() == 0 || asym.coeffs().cwiseAbs().maxCoeff() <= 1e-10,
          "top_k_eig_sym: matrix must be symmetric");
  return lanczos_top_k(
      sym.rows(), [&](const Vector& x, Vector& y) { y.noalias() = sym * x; }, k, opts);
}

EigPair lanczos_top_k(Index n, const std::function<void(const Vector&, Vector&)>& apply,
                      int k, const EigOptions& opts) {
  check_rank_request(n, k);
  const Index cap = std::min<Index>(n, std::max<Index>(opts.max_krylov, 2 * k + 1));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;

  Matrix basis(n, cap);
  Vector alpha(cap);
  Vector beta = Vector::Zero(cap);  // beta(j) couples basis j and j + 1
  Vector w(n);

  auto orthogonalize = [&](Vector& v, Index filled) {
    // Two passes of classical Gram-Schmidt against the current basis.
    for (int pass = 0; pass < 2; ++pass) {
      v -= basis.leftCols(filled) * (basis.leftCols(filled).transpose() * v);
    }
  };
  auto random_unit = [&](Index filled) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Vector v(n);
      for (Index i = 0; i < n; ++i) v(i) = normal(rng);
      orthogonalize(v, filled);
      const double norm = v.norm();
      if (norm > 1e-8) return Vector(v / norm);
    }
    throw Error(ErrorCode::kNoConvergence, "lanczos: cannot extend Krylov basis");
  };

  basis.col(0) = random_unit(0);
  double scale = 0.0;
  Index filled = 0;
  const Index check_every = std::max<Index>(4, k);

  for (Index j = 0; j < cap; ++j) {
    apply(basis.col(j), w);
    alpha(j) = basis.col(j).dot(w);
    filled = j + 1;
    orthogonalize(w, filled);
    const double b = w.norm();
    scale = std::max({scale, std::abs(alpha(j)), b});

    const bool last = filled == cap;
    const bool breakdown = b <= 1e-12 * std::max(1.0, scale);
    if (filled >= k && (last || breakdown || (filled - k) % check_every == 0)) {
      Matrix tri = Matrix::Zero(filled, filled);
      for (Index i = 0; i < filled; ++i) {
        tri(i, i) = alpha(i);
        if (i + 1 < filled) tri(i, i + 1) = tri(i + 1, i) = beta(i);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> small(tri);
      const auto order = order_by_magnitude(small.eigenvalues());
      bool converged = true;
      const double tail = breakdown ? 0.0 : b;
      for (int c = 0; c < k && converged; ++c) {
        const double theta = small.eigenvalues()(order[c]);
        const double est = std::abs(tail * small.eigenvectors()(filled - 1, order[c]));
        converged = est <= 0.1 * opts.residual_tol * std::max(1.0, std::abs(theta));
      }
      // A breakdown inside an invariant subspace can hide larger eigenvalues
      // elsewhere; only accept it once the whole space is spanned.
      if (converged && (!breakdown || filled == n)) {
        EigPair out = select_top(small.eigenvalues(), small.eigenvectors(), k);
        out.vectors = basis.leftCols(filled) * out.vectors;
        for (int c = 0; c < k; ++c) {
          Vector r(n);
          apply(out.vectors.col(c), r);
          r -= out.values(c) * out.vectors.col(c);
          if (r.norm() > opts.residual_tol * std::max(1.0, std::abs(out.values(c)))) {
            converged = false;
            break;
          }
        }
        if (converged) return out;
      }
    }
    if (last) break;
    if (breakdown) {
      beta(j) = 0.0;
      basis.col(j + 1) = random_unit(filled);
    } else {
      beta(j) = b;
      basis.col(j + 1) = w / b;
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "lanczos: residual tolerance not reached within " + std::to_string(cap) +
                  " basis vectors");
}

// ---------------------------------------------------------------------------
// Gram-trick SVD

namespace {

SvdTriple lift_gram(const Matrix& gram, int k, const EigOptions& opts,
                    const std::function<Matrix(const Matrix&)>& multiply) {
  check_rank_request(gram.rows(), k);
  EigPair eig = top_k_eig_sym(gram, k, opts);
  SvdTriple out;
  out.singular = eig.values.cwiseMax(0.0).cwiseSqrt();
  const double top = out.singular(0);
  const double floor = kRankTolerance * top;
  if (!(top > 0.0) || out.singular(k - 1) <= floor) {
    throw RankDeficient("gram_svd: singular value " + std::to_string(k) + " is " +
                        std::to_string(out.singular(k - 1)) + ", at or below tolerance " +
                        std::to_string(floor));
  }
  out.right = std::move(eig.vectors);
  out.left = multiply(out.right) * out.singular.cwiseInverse().asDiagonal();
  return out;
}

}  // namespace

SvdTriple gram_svd(const SparseMatrix& rect, int k, const EigOptions& opts) {
  const Matrix gram = Matrix(SparseMatrix(rect.transpose() * rect));
  return lift_gram(gram, k, opts, [&](const Matrix& v) { return Matrix(rect * v); });
}

SvdTriple gram_svd(const Matrix& rect, int k, const EigOptions& opts) {
  const Matrix gram = rect.transpose() * rect;
  return lift_gram(gram, k, opts, [&](const Matrix& v) { return Matrix(rect * v); });
}

// ---------------------------------------------------------------------------
// k-means

namespace {

int nearest_center(const Matrix& points, Index i, const Matrix& centers, double* dist) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centers.rows(); ++c) {
    const double d = (points.row(i) - centers.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist) *dist = best_d;
  return best;
}

Matrix plus_plus_seeds(const Matrix& points, int k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<bool> chosen(n, false);
  Vector d2 = Vector::Constant(n, std::numeric_limits<double>::infinity());

  Index first = std::uniform_int_distribution<Index>(0, n - 1)(rng);
  centers.row(0) = points.row(first);
  chosen[first] = true;
  for (int c = 1; c < k; ++c) {
    for (Index i = 0; i < n; ++i) {
      d2(i) = std::min(d2(i), (points.row(i) - centers.row(c - 1)).squaredNorm());
    }
    const double total = d2.sum();
    Index pick = -1;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (Index i = 0; i < n; ++i) {
        if (d2(i) <= 0.0) continue;
        pick = i;
        target -= d2(i);
        if (target < 0.0) break;
      }
    } else {
      // Every point coincides with a chosen seed: pick an unused index.
      std::vector<Index> unused;
      for (Index i = 0; i < n; ++i) {
        if (!chosen[i]) unused.push_back(i);
      }
      pick = unused[std::uniform_int_distribution<std::size_t>(0, unused.size() - 1)(rng)];
    }
    chosen[pick] = true;
    centers.row(c) = points.row(pick);
  }
  return centers;
}

// Moves the worst-fit point of a multi-member cluster into each empty cluster.
void repair_empty(const Matrix& points, const Matrix& centers, Labels& labels, int k) {
  const Index n = points.rows();
  for (int attempt = 0; attempt < k; ++attempt) {
    std::vector<Index> sizes(k, 0);
    for (int g : labels) ++sizes[g];
    const auto empty = std::find(sizes.begin(), sizes.end(), Index{0});
    if (empty == sizes.end()) return;
    Index worst = -1;
    double worst_d = -1.0;
    for (Index i = 0; i < n; ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = (points.row(i) - centers.row(labels[i])).squaredNorm();
      if (d > worst_d) {
        worst_d = d;
        worst = i;
      }
    }
    if (worst < 0) break;
    labels[worst] = static_cast<int>(empty - sizes.begin());
  }
  std::vector<Index> sizes(k, 0);
  for (int g : labels) ++sizes[g];
  if (std::find(sizes.begin(), sizes.end(), Index{0}) != sizes.end()) {
    throw Error(ErrorCode::kEmptyCluster, "kmeans: could not repair an empty cluster");
  }
}

Matrix cluster_means(const Matrix& points, const Labels& labels, int k) {
  Matrix centers = Matrix::Zero(k, points.cols());
  Vector counts = Vector::Zero(k);
  for (Index i = 0; i < points.rows(); ++i) {
    centers.row(labels[i]) += points.row(i);
    counts(labels[i]) += 1.0;
  }
  for (int c = 0; c < k; ++c) centers.row(c) /= counts(c);
  return centers;
}

double cost(const Matrix& points, const Labels& labels, const Matrix& centers) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centers.row(labels[i])).squaredNorm();
  }
  return total;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, std::uint64_t seed,
                    const KMeansOptions& opts) {
  const Index n = points.rows();
  require(k >= 1, "kmeans: K must be at least 1");
  require(n >= k, "kmeans: need at least K points");
  require(points.allFinite(), "kmeans: points must be finite");
  std::mt19937_64 rng(seed);

  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  Labels labels(n);
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Matrix centers = plus_plus_seeds(points, k, rng);
    double previous = std::numeric_limits<double>::infinity();
    double objective = previous;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      for (Index i = 0; i < n; ++i) labels[i] = nearest_center(points, i, centers, nullptr);
      repair_empty(points, centers, labels, k);
      centers = cluster_means(points, labels, k);
      objective = cost(points, labels, centers);
      assert(objective <= previous * (1.0 + 1e-12) + 1e-300);
      if (objective == 0.0) break;
      if (std::isfinite(previous) &&
          previous - objective <= opts.relative_tolerance * previous) {
        break;
      }
      previous = objective;
    }
    if (objective < best.objective) {
      best.objective = objective;
      best.labels = labels;
      best.centers = centers;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Whole-graph spectral clustering

SpectralClustering spectral_cluster(const SparseGraph& graph, int k, std::uint64_t seed,
                                    const EigOptions& eig, const KMeansOptions& km) {
  SquareLaplacian lap = laplacian_square(graph);
  EigPair top = top_k_eig_sym(lap.matrix, k, eig);
  const double first = std::abs(top.values(0));
  if (!(first > 0.0) || std::abs(top.values(k - 1)) <= kRankTolerance * first) {
    throw RankDeficient("spectral_cluster: eigenvalue " + std::to_string(k) +
                        " vanishes, the graph cannot support K clusters");
  }
  KMeansResult clusters = kmeans(top.vectors, k, seed, km);
  SpectralClustering out;
  out.labels = std::move(clusters.labels);
  out.centers = std::move(clusters.centers);
  out.embedding = std::move(top.vectors);
  out.eigenvalues = std::move(top.values);
  out.isolated = std::move(lap.isolated);
  return out;
}

}  // namespace dcd

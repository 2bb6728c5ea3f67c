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

#include <algorithm>
#include <numeric>
#include <cmath>
#include <random>

#include "dcd/dcd_worker.hpp"
#include "dcd/metrics.hpp"
#include "dcd/spectral_core.hpp"
#include "oracles.hpp"

using namespace dcd;

namespace {

SparseGraph cliques(int count, int size) {
  std::vector<std::pair<Index, Index>> e;
  for (int c = 0; c < count; ++c)
    for (int i = 0; i < size; ++i)
      for (int j = i + 1; j < size; ++j) e.emplace_back(c * size + i, c * size + j);
  return SparseGraph::from_edges(count * size, e);
}

Labels random_labels(std::size_t n, int k, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, k - 1);
  Labels out(n);
  for (int& x : out) x = u(rng);
  return out;
}

}  // namespace

TEST_CASE("misclustering_rate examples") {
  CHECK(misclustering_rate({1, 1, 0, 0}, {0, 0, 1, 1}, 2).rate == 0.0);
  CHECK(misclustering_rate({0, 1, 0, 1}, {0, 0, 1, 1}, 2).rate == 0.5);
  const MatchedRate same = misclustering_rate({0, 1, 2, 2}, {0, 1, 2, 2}, 3);
  CHECK(same.rate == 0.0);
  CHECK(same.permutation == std::vector<int>{0, 1, 2});
  CHECK(misclustering_rate({}, {}, 2).rate == 0.0);
  CHECK_THROWS_AS(misclustering_rate({0, 1}, {0}, 2), Error);
  CHECK_THROWS_AS(misclustering_rate({0, 2}, {0, 1}, 2), Error);
}

TEST_CASE("misclustering_rate matches brute force and is relabelling invariant") {
  std::mt19937_64 rng(4);
  for (int k = 2; k <= 6; ++k)
    for (int t = 0; t < 40; ++t) {
      const Labels truth = random_labels(50, k, rng);
      const Labels est = random_labels(50, k, rng);
      const MatchedRate r = misclustering_rate(est, truth, k);
      CHECK(r.rate == doctest::Approx(oracle::brute_force_rate(est, truth, k)).epsilon(1e-15));
      std::vector<int> relabel(k);
      std::iota(relabel.begin(), relabel.end(), 0);
      std::shuffle(relabel.begin(), relabel.end(), rng);
      Labels est2 = est, truth2 = truth;
      for (int& x : est2) x = relabel[x];
      std::shuffle(relabel.begin(), relabel.end(), rng);
      for (int& x : truth2) x = relabel[x];
      CHECK(misclustering_rate(est2, truth2, k).rate == doctest::Approx(r.rate).epsilon(1e-15));
      std::vector<int> sorted = r.permutation;
      std::sort(sorted.begin(), sorted.end());
      for (int e = 0; e < k; ++e) CHECK(sorted[e] == e);
    }
}

TEST_CASE("Hungarian assignment equals exhaustive search") {
  std::mt19937_64 rng(8);
  for (int k = 2; k <= 5; ++k)
    for (int t = 0; t < 200; ++t) {
      const Labels truth = random_labels(40, k, rng);
      const Labels est = random_labels(40, k, rng);
      const Matrix c = confusion_matrix(est, truth, k);
      const auto h = max_weight_assignment(c);
      const auto b = max_weight_assignment_exhaustive(c);
      double vh = 0, vb = 0;
      for (int e = 0; e < k; ++e) {
        vh += c(e, h[e]);
        vb += c(e, b[e]);
      }
      CHECK(vh == vb);
    }
  // K above the brute-force cutoff goes through the Hungarian path.
  const Labels truth = random_labels(200, 10, rng);
  Labels est(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) est[i] = (truth[i] + 3) % 10;
  est[0] = (est[0] + 1) % 10;
  CHECK(misclustering_rate(est, truth, 10).rate == doctest::Approx(1.0 / 200.0));
}

TEST_CASE("lee") {
  std::mt19937_64 rng(3);
  const Matrix pop = oracle::random_matrix(30, 3, rng);
  CHECK(lee(pop, pop) < -25.0);

  const Matrix r = oracle::random_orthogonal(3, rng);
  Matrix e = oracle::random_matrix(30, 3, rng);
  e *= std::exp(-3.0) / e.norm();
  const Matrix est = pop * r + e;
  CHECK(lee(est, pop) <= -3.0 + 1e-6);

  const Matrix w = oracle::random_orthogonal(3, rng);
  const Matrix other = oracle::random_matrix(30, 3, rng);
  CHECK(lee(Matrix(other * w), pop) == doctest::Approx(lee(other, pop)).epsilon(1e-10));
  CHECK(lee(other, Matrix(pop * w)) == doctest::Approx(lee(other, pop)).epsilon(1e-10));
}

TEST_CASE("relative_density examples") {
  CHECK(relative_density(cliques(2, 3), {0, 0, 0, 1, 1, 1}) == 0.0);
  CHECK(relative_density(cliques(1, 4), {0, 0, 1, 1}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(relative_density(cliques(2, 3), {0, 0, 0, 0, 0, 0}), Error);
  CHECK_THROWS_AS(relative_density(cliques(1, 2), {0, 1}), Error);  // no within pairs
  std::vector<std::pair<Index, Index>> e = {{0, 2}, {1, 3}};
  try {
    relative_density(SparseGraph::from_edges(4, e), {0, 0, 1, 1});
    FAIL("expected DivisionByZero");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::kDivisionByZero);
  }
}

TEST_CASE("relative_density of a planted SBM") {
  const SbmSample s = sample_sbm(balanced_sbm(1000, 3, 0.2, 0.5), 6);
  CHECK(std::abs(relative_density(s.graph, s.truth.labels) - 0.5) <= 0.05);
}

TEST_CASE("unbalance_alpha") {
  GroundTruth t;
  t.num_blocks = 2;
  t.labels = oracle::contiguous_labels({50, 50});
  PartitionPlan plan;
  plan.pilot.indices = {0, 50};
  IndexList w0, w1;
  for (Index i = 1; i < 50; ++i) (i % 2 ? w0 : w1).push_back(i);
  for (Index i = 51; i < 100; ++i) (i % 2 ? w0 : w1).push_back(i);
  plan.worker_assignments = {w0, w1};
  for (double a : unbalance_alpha(plan, t)) CHECK(a <= 0.02);

  PartitionPlan skew;
  skew.pilot.indices = {};
  IndexList only0, only1;
  for (Index i = 0; i < 100; ++i) (i < 50 ? only0 : only1).push_back(i);
  skew.worker_assignments = {only0, only1};
  for (double a : unbalance_alpha(skew, t)) CHECK(a == doctest::Approx(0.5));

  PartitionPlan exact;
  exact.pilot.indices = {0, 50};
  exact.worker_assignments = {{1, 2, 51, 52}, {}};
  for (Index i = 3; i < 50; ++i) exact.worker_assignments[1].push_back(i);
  for (Index i = 53; i < 100; ++i) exact.worker_assignments[1].push_back(i);
  for (double a : unbalance_alpha(exact, t)) CHECK(a == 0.0);
}

TEST_CASE("evaluate and the CSV row") {
  const SbmSample s = sample_sbm(balanced_sbm(400, 2, 0.3, 0.5), 1);
  const PilotSet pilots = sample_pilots(400, 100, 2, PilotPolicy::kStratified, &s.truth, 2);
  const PartitionPlan plan = plan_partition(400, pilots, 3, PartitionMode::even(), &s.truth, 3);
  DetectOptions opts;
  opts.retain_left_singular = true;
  const ClusteringResult r = run_detection(s.graph, 2, plan, 4, opts);
  const Matrix b = make_connectivity(0.3, 0.5, 2);
  const EvalReport rep = evaluate(s.graph, r, plan, &s.truth, &b);
  CHECK(rep.per_worker_rates.size() == 3);
  CHECK(rep.alpha.size() == 3);
  REQUIRE(rep.lee.has_value());
  REQUIRE(rep.red.has_value());
  CHECK(*rep.lee < 0.0);
  CHECK(rep.misclustering_rate == doctest::Approx(oracle::brute_force_rate(r.labels, s.truth.labels, 2)));

  const std::string row = report_csv_row(rep);
  CHECK(std::count(row.begin(), row.end(), ',') == 6);
  const std::string header = report_csv_header();
  CHECK(std::count(header.begin(), header.end(), ',') == 6);

  const EvalReport bare = evaluate(s.graph, r, plan, nullptr, nullptr);
  CHECK_FALSE(bare.lee.has_value());
  CHECK(bare.per_worker_rates.empty());
  CHECK(report_csv_row(bare).find(",,") != std::string::npos);
}

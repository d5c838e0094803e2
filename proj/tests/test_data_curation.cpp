// Copyright 2026 The colmax Authors
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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "colmax/clustering.hpp"
#include "colmax/mining.hpp"
#include "test_support.hpp"

using namespace colmax;
using namespace colmax::curation;
namespace tst = colmax::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

struct Blobs {
  std::vector<Vector> points;
  std::vector<std::size_t> labels;
  std::vector<Vector> centres;
};

Blobs make_blobs(std::mt19937_64& rng, std::size_t n_blobs, std::size_t per_blob, std::size_t dim,
                 float spread = 10.0f) {
  std::normal_distribution<float> g;
  Blobs b;
  for (std::size_t k = 0; k < n_blobs; ++k) {
    Vector c(dim);
    for (float& x : c) x = spread * g(rng);
    b.centres.push_back(c);
    for (std::size_t i = 0; i < per_blob; ++i) {
      Vector p(c);
      for (float& x : p) x += g(rng);
      b.points.push_back(std::move(p));
      b.labels.push_back(k);
    }
  }
  return b;
}

// Fraction of points whose label agrees under the best relabelling.
double best_permutation_agreement(const std::vector<std::size_t>& got, const std::vector<std::size_t>& want,
                                  std::size_t k) {
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < got.size(); ++i) agree += perm[got[i]] == want[i];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(got.size());
}

double sq_dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += double(a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

// --- mining -------------------------------------------------------------------

TEST_CASE("threshold filters likely false negatives") {
  const std::map<std::string, double> cands{{"pos", 0.8}, {"a", 0.9}, {"b", 0.75}, {"c", 0.7}, {"d", 0.5}};
  const auto t = mine_hard_negatives("q", "pos", cands, 2, 0.95);
  CHECK(t.negative_ids == std::vector<std::string>{"b", "c"});
  CHECK(t.query_id == "q");
  CHECK(t.positive_id == "pos");
  CHECK(t.teacher_scores.at("pos") == 0.8);
  CHECK(t.teacher_scores.at("b") == 0.75);
  CHECK(t.teacher_scores.count("a") == 0);
}

TEST_CASE("threshold one with every candidate below the positive is plain top-k") {
  const std::map<std::string, double> cands{{"pos", 1.0}, {"a", 0.2}, {"b", 0.9}, {"c", 0.5}, {"d", 0.1}};
  CHECK(mine_hard_negatives("q", "pos", cands, 3, 1.0).negative_ids == std::vector<std::string>{"b", "c", "a"});
}

TEST_CASE("all candidates above the cutoff give no negatives") {
  const std::map<std::string, double> cands{{"pos", 0.5}, {"a", 0.49}, {"b", 0.6}};
  CHECK(mine_hard_negatives("q", "pos", cands, 5).negative_ids.empty());
}

TEST_CASE("exact cutoff ties are excluded and equal scores sort by id") {
  const std::map<std::string, double> cands{{"pos", 1.0}, {"z", 0.5}, {"a", 0.5}, {"m", 0.5}, {"at", 0.95}};
  const auto t = mine_hard_negatives("q", "pos", cands, 10, 0.95);
  CHECK(t.negative_ids == std::vector<std::string>{"a", "m", "z"});
}

TEST_CASE("mining errors") {
  const std::map<std::string, double> cands{{"pos", 1.0}, {"a", 0.5}};
  CHECK(code_of([&] { mine_hard_negatives("q", "missing", cands, 1); }) == ErrorCode::MissingPositiveScore);
  CHECK(code_of([&] { mine_hard_negatives("q", "pos", cands, 0); }) == ErrorCode::NonPositiveK);
  CHECK(code_of([&] { mine_hard_negatives("q", "pos", cands, -3); }) == ErrorCode::NonPositiveK);
  CHECK(code_of([&] { mine_hard_negatives("q", "pos", cands, 1, 0.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { mine_hard_negatives("q", "pos", cands, 1, 1.5); }) == ErrorCode::InvalidArgument);
  const std::map<std::string, double> bad{{"pos", 1.0}, {"a", NAN}};
  CHECK(code_of([&] { mine_hard_negatives("q", "pos", bad, 1); }) == ErrorCode::NonFiniteValue);
}

TEST_CASE("mining safety and maximality on random pools") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::pair<std::string, double>> pool;
    std::map<std::string, double> cands;
    const std::size_t n = 2 + trial % 30;
    std::uniform_int_distribution<int> grid(0, 40);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid(rng) / 40.0;
      pool.emplace_back("c" + std::to_string(i), s);
      cands["c" + std::to_string(i)] = s;
    }
    const std::string pos = pool[trial % n].first;
    const std::size_t k = 1 + trial % 6;
    const auto t = mine_hard_negatives("q", pos, cands, static_cast<std::int64_t>(k));
    const double cutoff = 0.95 * cands[pos];
    for (const auto& id : t.negative_ids) CHECK(cands[id] < cutoff);
    CHECK(t.negative_ids.size() <= k);
    CHECK(std::find(t.negative_ids.begin(), t.negative_ids.end(), pos) == t.negative_ids.end());
    if (!t.negative_ids.empty()) {
      const double weakest = cands[t.negative_ids.back()];
      for (const auto& [id, s] : cands) {
        const bool chosen = std::find(t.negative_ids.begin(), t.negative_ids.end(), id) != t.negative_ids.end();
        if (!chosen && id != pos && s < cutoff) CHECK(s <= weakest);
      }
    }
    CHECK(t.negative_ids == tst::oracle_mine(pos, pool, k, 0.95));
  }
}

TEST_CASE("triplets round-trip through JSON lines") {
  const std::map<std::string, double> cands{{"pos", 0.8}, {"a", 0.9}, {"b", 0.75}, {"c", 0.7}};
  const auto t = mine_hard_negatives("query \"1\"", "pos", cands, 2);
  const auto line = to_json_line(t);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.rfind("{\"query_id\"", 0) == 0);
  CHECK(triplet_from_json_line(line) == t);

  const auto dir = tst::temp_dir("triplets");
  write_triplets({t, t}, dir / "t.jsonl");
  const auto back = read_triplets(dir / "t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[1] == t);
  CHECK(code_of([] { triplet_from_json_line("{not json"); }) == ErrorCode::ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("query expansion keeps originals first") {
  const std::vector<MultiVector> qs{MultiVector("q1", 1, {1}), MultiVector("q2", 1, {2})};
  const auto out = expand_queries(qs, [](const MultiVector& q) {
    MultiVector copy = q;
    copy.set_id(q.id() + "-fr");
    return std::vector<MultiVector>{copy};
  });
  REQUIRE(out.size() == 4);
  CHECK(out[0].id() == "q1");
  CHECK(out[1].id() == "q2");
  CHECK(out[2].id() == "q1-fr");
  CHECK(out[3].id() == "q2-fr");
  CHECK(expand_queries(qs, {}).size() == 2);
}

// --- k-means ------------------------------------------------------------------

TEST_CASE("k equal to the point count isolates every point") {
  std::mt19937_64 rng(41);
  const auto b = make_blobs(rng, 1, 12, 3);
  const auto r = kmeans(b.points, b.points.size(), {.seed = 1});
  CHECK(r.inertia == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::set<std::size_t>(r.labels.begin(), r.labels.end()).size() == b.points.size());
}

TEST_CASE("k equal to one puts the centroid at the mean") {
  std::mt19937_64 rng(42);
  const auto b = make_blobs(rng, 2, 20, 4);
  const auto r = kmeans(b.points, 1, {.seed = 2});
  for (std::size_t c = 0; c < 4; ++c) {
    double mean = 0.0;
    for (const auto& p : b.points) mean += p[c];
    mean /= static_cast<double>(b.points.size());
    CHECK(r.centroids[0][c] == doctest::Approx(mean).epsilon(1e-5));
  }
  CHECK(std::all_of(r.labels.begin(), r.labels.end(), [](std::size_t l) { return l == 0; }));
}

TEST_CASE("three separated blobs are recovered") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const auto b = make_blobs(rng, 3, 60, 8);
    // A single seeding lands in a merged-blob optimum a few percent of the time.
    const auto r = kmeans(b.points, 3, {.seed = seed, .max_iters = 100, .restarts = 5});
    CHECK(best_permutation_agreement(r.labels, b.labels, 3) >= 0.99);
    CHECK(r.converged);
  }
}

TEST_CASE("Lloyd objective never increases") {
  std::mt19937_64 rng(43);
  const auto b = make_blobs(rng, 5, 40, 6, 1.5f);
  const auto r = kmeans(b.points, 7, {.seed = 3});
  REQUIRE_FALSE(r.inertia_trace.empty());
  for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
    CHECK(r.inertia_trace[i] <= r.inertia_trace[i - 1] * (1 + 1e-12));
  }
  CHECK(r.inertia == doctest::Approx(within_dispersion(b.points, r.labels, r.centroids)));
}

TEST_CASE("k-means is deterministic per seed") {
  std::mt19937_64 rng(44);
  const auto b = make_blobs(rng, 4, 30, 5, 2.0f);
  const auto a = kmeans(b.points, 4, {.seed = 9});
  const auto c = kmeans(b.points, 4, {.seed = 9});
  CHECK(a.labels == c.labels);
  CHECK(a.inertia == c.inertia);
}

TEST_CASE("k-means argument errors") {
  const std::vector<Vector> pts{{0, 0}, {1, 1}};
  CHECK(code_of([&] { kmeans(pts, 3, {}); }) == ErrorCode::KTooLarge);
  CHECK(code_of([&] { kmeans(pts, 0, {}); }) == ErrorCode::NonPositiveK);
  const std::vector<Vector> ragged{{0, 0}, {1}};
  CHECK(code_of([&] { kmeans(ragged, 1, {}); }) == ErrorCode::DimMismatch);
}

TEST_CASE("duplicate points still yield k non-empty clusters") {
  std::vector<Vector> pts(10, Vector{1, 1});
  pts.push_back({5, 5});
  pts.push_back({9, 9});
  const auto r = kmeans(pts, 3, {.seed = 4});
  std::vector<std::size_t> sizes(3, 0);
  for (auto l : r.labels) ++sizes[l];
  CHECK(std::count(sizes.begin(), sizes.end(), 0) == 0);
  CHECK(r.inertia == doctest::Approx(0.0));
}

// --- reduction and gap statistic ---------------------------------------------------

TEST_CASE("reduction preconditions") {
  std::mt19937_64 rng(45);
  const auto fifty = make_blobs(rng, 1, 80, 50).points;
  CHECK(code_of([&] { reduce_for_clustering(fifty); }) == ErrorCode::InsufficientTargetReduction);

  // Rank 3 in dim 64.
  std::normal_distribution<float> g;
  std::vector<Vector> basis(3, Vector(64));
  for (auto& v : basis) for (float& x : v) x = g(rng);
  std::vector<Vector> low;
  for (int i = 0; i < 100; ++i) {
    Vector p(64, 0.0f);
    for (const auto& v : basis) {
      const float w = g(rng);
      for (std::size_t c = 0; c < 64; ++c) p[c] += w * v[c];
    }
    low.push_back(p);
  }
  CHECK(code_of([&] { reduce_for_clustering(low); }) == ErrorCode::RankDeficient);
}

TEST_CASE("reduction keeps the blob centroid distance ordering") {
  std::mt19937_64 rng(46);
  const auto b = make_blobs(rng, 4, 40, 512);
  const auto reduced = reduce_for_clustering(b.points);
  REQUIRE(reduced.front().size() == 50);
  auto centroids = [&](const std::vector<Vector>& pts) {
    std::vector<Vector> c(4, Vector(pts.front().size(), 0.0f));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t d = 0; d < pts[i].size(); ++d) c[b.labels[i]][d] += pts[i][d] / 40.0f;
    }
    return c;
  };
  const auto before = centroids(b.points);
  const auto after = centroids(reduced);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) pairs.emplace_back(sq_dist(before[i], before[j]), sq_dist(after[i], after[j]));
  }
  for (const auto& p : pairs) {
    for (const auto& q : pairs) {
      if (p.first < q.first) CHECK(p.second < q.second);
    }
  }
}

TEST_CASE("gap statistic finds three blobs across seeds") {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(200 + seed);
    const auto b = make_blobs(rng, 3, 40, 6);
    GapOptions opts;
    opts.seed = seed;
    hits += gap_statistic_select_k(b.points, opts).chosen_k == 3;
  }
  CHECK(hits >= 9);
}

TEST_CASE("gap statistic picks one cluster for a single Gaussian") {
  std::mt19937_64 rng(47);
  const auto b = make_blobs(rng, 1, 200, 5);
  GapOptions opts;
  opts.seed = 5;
  const auto curve = gap_statistic_select_k(b.points, opts);
  CHECK(curve.chosen_k == 1);
  REQUIRE(curve.points.size() == opts.k_max);
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].k == i + 1);
    CHECK(curve.points[i].sd >= 0.0);
  }
}

TEST_CASE("gap curve dispersion is non-increasing in k") {
  std::mt19937_64 rng(48);
  const auto b = make_blobs(rng, 4, 30, 4, 3.0f);
  GapOptions opts;
  opts.seed = 6;
  const auto curve = gap_statistic_select_k(b.points, opts);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].within_dispersion <= curve.points[i - 1].within_dispersion * (1 + 1e-9));
  }
}

TEST_CASE("gap statistic chosen k obeys the selection rule") {
  std::mt19937_64 rng(49);
  const auto b = make_blobs(rng, 3, 30, 3, 4.0f);
  GapOptions opts;
  opts.seed = 7;
  const auto curve = gap_statistic_select_k(b.points, opts);
  const auto& pts = curve.points;
  std::size_t want = opts.k_max;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i].gap >= pts[i + 1].gap - pts[i + 1].sd) {
      want = pts[i].k;
      break;
    }
  }
  CHECK(curve.chosen_k == want);
}

TEST_CASE("gap statistic argument errors") {
  const std::vector<Vector> same(20, Vector{1, 2, 3});
  CHECK(code_of([&] { gap_statistic_select_k(same, {}); }) == ErrorCode::DegenerateData);
  std::mt19937_64 rng(50);
  const auto b = make_blobs(rng, 1, 20, 2);
  CHECK(code_of([&] { gap_statistic_select_k(b.points, {.k_max = 1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { gap_statistic_select_k(b.points, {.k_max = 4, .reference_draws = 4}); }) ==
        ErrorCode::InvalidArgument);
  const std::vector<Vector> few{{0, 0}, {1, 1}, {2, 0}};
  CHECK(code_of([&] { gap_statistic_select_k(few, {.k_max = 5}); }) == ErrorCode::KTooLarge);
}

// --- sampling -----------------------------------------------------------------

TEST_CASE("fourteen full clusters give ten ids each") {
  std::vector<ClusterAssignment> a;
  for (std::size_t c = 0; c < 14; ++c) {
    for (std::size_t i = 0; i < 25; ++i) a.push_back({"d" + std::to_string(c) + "-" + std::to_string(i), c});
  }
  const auto s = cluster_uniform_sample(a, 10, 1);
  CHECK(s.size() == 140);
  std::map<std::size_t, int> per;
  for (const auto& id : s) per[std::stoul(id.substr(1, id.find('-') - 1))]++;
  CHECK(per.size() == 14);
  for (const auto& [c, n] : per) CHECK(n == 10);
  CHECK(std::set<std::string>(s.begin(), s.end()).size() == 140);
}

TEST_CASE("small clusters contribute their full membership") {
  std::vector<ClusterAssignment> a{{"a", 0}, {"b", 0}, {"c", 1}, {"d", 1}, {"e", 1}, {"f", 1}};
  const auto s = cluster_uniform_sample(a, 3, 2);
  CHECK(s.size() == 5);
  CHECK(std::count(s.begin(), s.end(), "a") == 1);
  CHECK(std::count(s.begin(), s.end(), "b") == 1);
}

TEST_CASE("sampling is deterministic per seed and varies across seeds") {
  std::vector<ClusterAssignment> a;
  for (std::size_t i = 0; i < 200; ++i) a.push_back({"d" + std::to_string(i), i % 4});
  CHECK(cluster_uniform_sample(a, 5, 9) == cluster_uniform_sample(a, 5, 9));
  CHECK(cluster_uniform_sample(a, 5, 9) != cluster_uniform_sample(a, 5, 10));
}

TEST_CASE("assignments round-trip through CSV") {
  const std::vector<ClusterAssignment> a{{"doc-1", 0}, {"doc-2", 3}, {"doc-3", 1}};
  const auto dir = tst::temp_dir("assign");
  write_assignments(a, dir / "a.csv");
  CHECK(read_assignments(dir / "a.csv") == a);
  std::ifstream in(dir / "a.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "doc_id,cluster");
  std::filesystem::remove_all(dir);
}

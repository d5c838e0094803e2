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
#include <random>
#include <sstream>

#include "doctest.h"
#include "colmax/ablation.hpp"
#include "colmax/index_file.hpp"
#include "colmax/metrics.hpp"
#include "colmax/synthetic.hpp"
#include "colmax/trec_io.hpp"
#include "test_support.hpp"

using namespace colmax;
using namespace colmax::eval;
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

std::vector<ScoredDoc> ranked(std::initializer_list<const char*> ids) {
  std::vector<ScoredDoc> out;
  double s = static_cast<double>(ids.size());
  for (const char* id : ids) out.push_back({id, s--});
  return out;
}

// Straight-from-the-definition NDCG for one query.
double oracle_ndcg(const std::vector<std::string>& ids, const std::map<std::string, int>& judged, std::size_t k) {
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ids.size()); ++r) {
    const auto it = judged.find(ids[r]);
    const int g = it == judged.end() ? 0 : it->second;
    dcg += (std::pow(2.0, g) - 1.0) / std::log2(r + 2.0);
  }
  std::vector<int> grades;
  for (const auto& [id, g] : judged) grades.push_back(g);
  std::sort(grades.rbegin(), grades.rend());
  double ideal = 0.0;
  for (std::size_t r = 0; r < std::min(k, grades.size()); ++r) ideal += (std::pow(2.0, grades[r]) - 1.0) / std::log2(r + 2.0);
  return ideal == 0.0 ? 0.0 : dcg / ideal;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

BenchmarkConfig small_bench(std::uint64_t seed) {
  BenchmarkConfig cfg;
  cfg.seed = seed;
  cfg.n_docs = 300;
  cfg.n_queries = 20;
  cfg.dim = 32;
  cfg.planted.topics = 8;
  return cfg;
}

}  // namespace

// --- NDCG ---------------------------------------------------------------------

TEST_CASE("binary grades one-zero-one") {
  CHECK(dcg_at_k({1, 0, 1}, 3) == doctest::Approx(1.5));
  CHECK(dcg_at_k({1, 1, 0}, 3) == doctest::Approx(1.0 + 1.0 / std::log2(3.0)));
  Qrels qrels;
  qrels.add("q", "a", 1);
  qrels.add("q", "c", 1);
  RunResult run;
  run.add("q", ranked({"a", "b", "c"}));
  CHECK(ndcg_at_k(run, qrels, 3).mean == doctest::Approx(1.5 / 1.6309297535714575).epsilon(1e-12));
  CHECK(ndcg_at_k(run, qrels, 3).mean == doctest::Approx(0.9197).epsilon(1e-4));
}

TEST_CASE("perfect and empty rankings") {
  Qrels qrels;
  qrels.add("q", "a", 2);
  qrels.add("q", "b", 1);
  RunResult perfect, none;
  perfect.add("q", ranked({"a", "b", "x"}));
  none.add("q", ranked({"x", "y", "z"}));
  CHECK(ndcg_at_k(perfect, qrels, 10).mean == 1.0);
  CHECK(ndcg_at_k(none, qrels, 10).mean == 0.0);
}

TEST_CASE("queries without relevant judgments leave the mean") {
  Qrels qrels;
  qrels.add("q1", "a", 1);
  qrels.add("q2", "b", 0);  // judged but nothing relevant
  RunResult run;
  run.add("q1", ranked({"a"}));
  run.add("q2", ranked({"z"}));
  run.add("q3", ranked({"z"}));  // not judged at all
  const auto rep = ndcg_at_k(run, qrels, 10);
  CHECK(rep.mean == 1.0);
  CHECK(rep.per_query.size() == 1);
  CHECK(rep.k == 10);
}

TEST_CASE("judged queries absent from the run count as zero") {
  Qrels qrels;
  qrels.add("q1", "a", 1);
  qrels.add("q2", "b", 1);
  RunResult run;
  run.add("q1", ranked({"a"}));
  const auto rep = ndcg_at_k(run, qrels, 5);
  CHECK(rep.mean == doctest::Approx(0.5));
  CHECK(rep.per_query.at("q2") == 0.0);
}

TEST_CASE("NDCG argument errors") {
  Qrels empty;
  RunResult run;
  run.add("q", ranked({"a"}));
  CHECK(code_of([&] { ndcg_at_k(run, empty, 10); }) == ErrorCode::NoJudgedQueries);
  Qrels qrels;
  qrels.add("q", "a", 1);
  CHECK(code_of([&] { ndcg_at_k(run, qrels, 0); }) == ErrorCode::NonPositiveK);
  CHECK(code_of([&] { qrels.add("q", "a", 2); }) == ErrorCode::DuplicateId);
  CHECK(code_of([&] { qrels.add("q", "b", -1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { run.add("q", ranked({"b"})); }) == ErrorCode::DuplicateId);
  CHECK(code_of([&] { run.add("r", ranked({"b", "b"})); }) == ErrorCode::DuplicateId);
}

TEST_CASE("random graded runs match the oracle and stay in [0, 1]") {
  std::mt19937_64 rng(80);
  std::uniform_int_distribution<int> grade(0, 3);
  for (int trial = 0; trial < 100; ++trial) {
    Qrels qrels;
    std::map<std::string, int> judged;
    std::vector<std::string> ids;
    for (int d = 0; d < 15; ++d) {
      ids.push_back("d" + std::to_string(d));
      if (d % 2 == 0) {
        const int g = grade(rng);
        qrels.add("q", ids.back(), g);
        judged[ids.back()] = g;
      }
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    if (std::none_of(judged.begin(), judged.end(), [](const auto& p) { return p.second > 0; })) continue;
    std::vector<ScoredDoc> hits;
    for (std::size_t r = 0; r < ids.size(); ++r) hits.push_back({ids[r], -static_cast<double>(r)});
    RunResult run;
    run.add("q", hits);
    for (std::size_t k : {1u, 3u, 10u, 20u}) {
      const double v = ndcg_at_k(run, qrels, k).mean;
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(v == doctest::Approx(oracle_ndcg(ids, judged, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("reordering below the cutoff changes nothing") {
  Qrels qrels;
  qrels.add("q", "a", 1);
  qrels.add("q", "d", 2);
  RunResult r1, r2;
  r1.add("q", ranked({"a", "b", "c", "d", "e"}));
  r2.add("q", ranked({"a", "b", "c", "e", "d"}));
  CHECK(ndcg_at_k(r1, qrels, 3).mean == ndcg_at_k(r2, qrels, 3).mean);
  CHECK(ndcg_at_k(r1, qrels, 5).mean != ndcg_at_k(r2, qrels, 5).mean);
}

TEST_CASE("only the order of scores matters") {
  Qrels qrels;
  qrels.add("q", "b", 1);
  std::vector<ScoredDoc> a{{"a", 3.0}, {"b", 2.0}, {"c", 1.0}};
  std::vector<ScoredDoc> b{{"a", 300.0}, {"b", 0.5}, {"c", -7.0}};
  RunResult ra, rb;
  ra.add("q", a);
  rb.add("q", b);
  CHECK(ndcg_at_k(ra, qrels, 10).mean == ndcg_at_k(rb, qrels, 10).mean);
}

// --- TREC files ---------------------------------------------------------------

TEST_CASE("qrels and runs round-trip through text") {
  Qrels qrels;
  qrels.add("q1", "a", 2);
  qrels.add("q1", "b", 0);
  qrels.add("q2", "c", 1);
  std::stringstream qs;
  write_qrels(qrels, qs);
  const auto back = parse_qrels(qs);
  CHECK(back.all() == qrels.all());
  CHECK(back.size() == 3);
  CHECK(back.relevance("q1", "a") == 2);
  CHECK(back.relevance("q1", "zzz") == 0);

  RunResult run;
  run.add("q1", {{"a", 0.75}, {"b", 0.5}});
  run.add("q2", {{"c", -1.25}});
  std::stringstream rs;
  write_run(run, rs, "tagged");
  CHECK(rs.str().find("q1 Q0 a 1 ") == 0);
  CHECK(rs.str().find("tagged") != std::string::npos);
  const auto rback = parse_run(rs);
  REQUIRE(rback.all().size() == 2);
  CHECK(rback.all().at("q1")[0].doc_id == "a");
  CHECK(rback.all().at("q1")[1].score == doctest::Approx(0.5));
  CHECK(rback.all().at("q2")[0].score == doctest::Approx(-1.25));
}

TEST_CASE("run lines are re-ranked by score") {
  std::stringstream in("q Q0 low 1 0.1 t\nq Q0 high 2 0.9 t\nq Q0 b 3 0.5 t\nq Q0 a 4 0.5 t\n");
  const auto run = parse_run(in);
  const auto& hits = run.all().at("q");
  REQUIRE(hits.size() == 4);
  CHECK(hits[0].doc_id == "high");
  CHECK(hits[1].doc_id == "a");
  CHECK(hits[2].doc_id == "b");
  CHECK(hits[3].doc_id == "low");
}

TEST_CASE("malformed TREC lines are parse errors") {
  std::stringstream q("q 0 a\n");
  CHECK(code_of([&] { parse_qrels(q); }) == ErrorCode::ParseError);
  std::stringstream q2("q 0 a notanumber\n");
  CHECK(code_of([&] { parse_qrels(q2); }) == ErrorCode::ParseError);
  std::stringstream r("q Q0 a 1\n");
  CHECK(code_of([&] { parse_run(r); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_run("/nonexistent/run.txt"); }) == ErrorCode::IoFailure);
}

// --- synthetic benchmark ------------------------------------------------------

TEST_CASE("benchmark generation is deterministic per seed") {
  const auto dir = tst::temp_dir("bench");
  write_benchmark(generate_synthetic_benchmark(small_bench(5)), dir / "a");
  write_benchmark(generate_synthetic_benchmark(small_bench(5)), dir / "b");
  write_benchmark(generate_synthetic_benchmark(small_bench(6)), dir / "c");
  for (const char* f : {"corpus.cmx", "queries.cmx", "qrels.txt"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
  CHECK(slurp(dir / "a" / "corpus.cmx") != slurp(dir / "c" / "corpus.cmx"));

  const auto back = read_benchmark(dir / "a");
  const auto orig = generate_synthetic_benchmark(small_bench(5));
  CHECK(back.corpus == orig.corpus);
  CHECK(back.queries == orig.queries);
  CHECK(back.qrels.all() == orig.qrels.all());
  std::filesystem::remove_all(dir);
}

TEST_CASE("benchmark shape follows the config") {
  const auto cfg = small_bench(9);
  const auto bench = generate_synthetic_benchmark(cfg);
  CHECK(bench.corpus.size() == cfg.n_docs);
  CHECK(bench.queries.size() == cfg.n_queries);
  for (const auto& d : bench.corpus) {
    CHECK(d.dim() == cfg.dim);
    CHECK(d.token_count() >= cfg.tokens.min);
    CHECK(d.token_count() <= cfg.tokens.max);
  }
  for (const auto& q : bench.queries) {
    CHECK(q.token_count() == cfg.planted.query_tokens);
    const auto* j = bench.qrels.judgments(q.id());
    REQUIRE(j != nullptr);
    CHECK(std::count_if(j->begin(), j->end(), [](const auto& p) { return p.second == 2; }) == 1);
  }
}

TEST_CASE("noise-free queries are solved exactly by MaxSim") {
  auto cfg = small_bench(11);
  cfg.planted.query_noise = 0.0;
  cfg.planted.near_duplicate_rate = 1.0;
  const auto bench = generate_synthetic_benchmark(cfg);
  const auto index = store::IndexHandle::build(bench.corpus, Precision::FP32, true);
  RunResult run;
  for (const auto& q : bench.queries) run.add(search(normalized(q), index, 10));
  const auto rep = ndcg_at_k(run, bench.qrels, 10);
  CHECK(rep.mean == doctest::Approx(1.0).epsilon(1e-12));
  // The grade-1 near copy sits right behind the grade-2 positive.
  for (const auto& [qid, hits] : run.all()) {
    CHECK(bench.qrels.relevance(qid, hits[0].doc_id) == 2);
    CHECK(bench.qrels.relevance(qid, hits[1].doc_id) == 1);
  }
}

TEST_CASE("benchmark config errors") {
  auto cfg = small_bench(1);
  cfg.n_queries = cfg.n_docs + 1;
  CHECK(code_of([&] { generate_synthetic_benchmark(cfg); }) == ErrorCode::InvalidArgument);
  cfg = small_bench(1);
  cfg.planted.latent_rank = cfg.dim + 1;
  CHECK(code_of([&] { generate_synthetic_benchmark(cfg); }) == ErrorCode::InvalidArgument);
  cfg = small_bench(1);
  cfg.dim = 0;
  CHECK(code_of([&] { generate_synthetic_benchmark(cfg); }) == ErrorCode::InvalidArgument);
}

// --- ablation -----------------------------------------------------------------

TEST_CASE("relative NDCG percentages") {
  CHECK(ndcg_pct(0.5, 0.5) == 100.0);
  CHECK(ndcg_pct(0.4, 0.5) == doctest::Approx(80.0));
  CHECK(ndcg_pct(0.123456, 0.5) == doctest::Approx(24.69));
  CHECK(ndcg_pct(0.6, 0.5) == doctest::Approx(120.0));
}

TEST_CASE("ablation rows for a single configuration") {
  const auto est = store::estimate_storage(1000000, 100.0, 128, Precision::FP16);
  const auto rows = ablation_rows({{"full", 128, Precision::FP16}}, {est}, {0.42});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].storage_pct == 100);
  CHECK(rows[0].ndcg_pct == 100.0);
  CHECK(rows[0].storage_gib == doctest::Approx(est.gib_rounded()));
  CHECK(rows[0].embed_dim == 128);
  CHECK(to_csv(rows).rfind("label,dim,precision,storage_gib,storage_pct,ndcg,ndcg_pct\n", 0) == 0);
  CHECK(to_markdown(rows).find("full") != std::string::npos);
}

TEST_CASE("ablation rows relative to the first configuration") {
  const auto full = store::estimate_storage(1000, 10.0, 64, Precision::FP32);
  const auto half = store::estimate_storage(1000, 10.0, 32, Precision::FP16);
  const auto rows = ablation_rows({{"full", 64, Precision::FP32}, {"small", 32, Precision::FP16}}, {full, half},
                                  {0.8, 0.6});
  CHECK(rows[1].storage_pct == 25);
  CHECK(rows[1].ndcg_pct == doctest::Approx(75.0));
  CHECK(code_of([&] { ablation_rows({{"a", 1, Precision::FP32}}, {full, half}, {0.1}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("small end-to-end ablation") {
  auto cfg = small_bench(13);
  cfg.n_docs = 150;
  cfg.n_queries = 10;
  const auto bench = generate_synthetic_benchmark(cfg);
  AblationOptions opt;
  opt.projection_sample = 2000;
  const auto rows = run_ablation(bench.corpus, bench.queries, bench.qrels,
                                 {{"full", 32, Precision::FP32}, {"half", 16, Precision::FP16}, {"bits", 32, Precision::BINARY}},
                                 opt);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ndcg_pct == 100.0);
  CHECK(rows[0].storage_pct == 100);
  CHECK(rows[1].storage_pct == 25);
  CHECK(rows[2].storage_pct == 3);
  for (const auto& r : rows) {
    CHECK(r.ndcg >= 0.0);
    CHECK(r.ndcg <= 1.0);
  }
  CHECK(code_of([&] { run_ablation(bench.corpus, bench.queries, bench.qrels, {}, opt); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] {
          run_ablation(bench.corpus, bench.queries, bench.qrels, {{"big", 64, Precision::FP32}}, opt);
        }) == ErrorCode::InvalidArgument);
}

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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "colmax/training_math.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
namespace tst = colmax::testing;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Invocation r;
  r.code = colmax::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// A small benchmark whose queries copy their positive's tokens verbatim.
fs::path clean_bench(const fs::path& dir) {
  const auto bench = dir / "bench";
  const auto r = run({"gen-bench", "--out", bench.string(), "--docs", "200", "--queries", "12", "--dim", "16",
                      "--latent-rank", "8", "--topics", "4", "--query-noise", "0", "--seed", "3"});
  REQUIRE(r.code == 0);
  return bench;
}

}  // namespace

TEST_CASE("estimate-storage prints GiB in text and json") {
  auto r = run({"estimate-storage", "--docs", "1000000", "--avg-tokens", "773", "--dim", "4096"});
  CHECK(r.code == 0);
  CHECK(r.out.find("5897.5 GiB") != std::string::npos);

  r = run({"estimate-storage", "--docs", "1000000", "--avg-tokens", "773", "--dim", "4096", "--format", "json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("5897.5") != std::string::npos);
  CHECK(r.out.find('{') != std::string::npos);
}

TEST_CASE("usage errors exit 2 with help text") {
  auto r = run({"estimate-storage", "--docs", "10", "--bogus"});
  CHECK(r.code == colmax::cli::kExitUsage);
  CHECK(r.err.find("error: UsageError") != std::string::npos);
  CHECK(r.err.find("--avg-tokens") != std::string::npos);

  CHECK(run({"no-such-command"}).code == colmax::cli::kExitUsage);
  CHECK(run({"search", "--k", "3"}).code == colmax::cli::kExitUsage);
}

TEST_CASE("data errors exit 1 with the error code name") {
  auto r = run({"estimate-storage", "--docs", "0", "--avg-tokens", "10", "--dim", "8"});
  CHECK(r.code == colmax::cli::kExitDataError);
  CHECK(r.err.find("error: InvalidArgument:") != std::string::npos);

  r = run({"build-index", "--input", "/nonexistent/docs.jsonl", "--out", "/tmp/never.cmx"});
  CHECK(r.code == colmax::cli::kExitDataError);
  CHECK(r.err.find("error: IoFailure:") != std::string::npos);

  const auto dir = tst::temp_dir("cli_err");
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"a\", \"tokens\": [[1, 2], [3]]}\n";
  r = run({"build-index", "--input", (dir / "bad.jsonl").string(), "--out", (dir / "x.cmx").string()});
  CHECK(r.code == colmax::cli::kExitDataError);
  CHECK(r.err.find("error: DimMismatch:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("noise-free pipeline scores perfectly") {
  const auto dir = tst::temp_dir("cli_pipe");
  const auto bench = clean_bench(dir);
  const auto index = (dir / "corpus.cmx").string();
  const auto runfile = (dir / "run.txt").string();

  REQUIRE(run({"build-index", "--input", (bench / "corpus.cmx").string(), "--out", index}).code == 0);
  auto r = run({"search", "--index", index, "--queries", (bench / "queries.cmx").string(), "--out", runfile});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("# colmax search") != std::string::npos);
  r = run({"evaluate", "--run", runfile, "--qrels", (bench / "qrels.txt").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("ndcg@10 1.0000") != std::string::npos);

  // Search without --out writes the run to stdout.
  r = run({"search", "--index", index, "--queries", (bench / "queries.cmx").string(), "--k", "2"});
  CHECK(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 24);
  fs::remove_all(dir);
}

TEST_CASE("command-line flags override the config file") {
  const auto dir = tst::temp_dir("cli_cfg");
  const auto bench = clean_bench(dir);
  const auto index = (dir / "corpus.cmx").string();
  REQUIRE(run({"build-index", "--input", (bench / "corpus.cmx").string(), "--out", index}).code == 0);
  std::ofstream(dir / "search.conf") << "# search defaults\nk = 5\nmode = \"pooled\"\n";

  const auto r = run({"search", "--config", (dir / "search.conf").string(), "--index", index, "--queries",
                      (bench / "queries.cmx").string(), "--k", "3", "--tag", "cfg"});
  REQUIRE(r.code == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 36);  // 12 queries x k=3 from the command line
  CHECK(r.err.find("pooled") != std::string::npos);            // mode from the file
  fs::remove_all(dir);
}

TEST_CASE("seed can come from the environment") {
  const auto dir = tst::temp_dir("cli_seed");
  const std::vector<std::string> common{"--docs", "40", "--queries", "4", "--dim", "8", "--latent-rank", "4"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), common.begin(), common.end());
    return head;
  };
  REQUIRE(run(with({"gen-bench", "--out", (dir / "flag").string(), "--seed", "99"})).code == 0);
  ::setenv("COLMAX_SEED", "99", 1);
  REQUIRE(run(with({"gen-bench", "--out", (dir / "env").string()})).code == 0);
  ::unsetenv("COLMAX_SEED");
  REQUIRE(run(with({"gen-bench", "--out", (dir / "default").string()})).code == 0);
  CHECK(slurp(dir / "flag" / "corpus.cmx") == slurp(dir / "env" / "corpus.cmx"));
  CHECK(slurp(dir / "flag" / "corpus.cmx") != slurp(dir / "default" / "corpus.cmx"));
  fs::remove_all(dir);
}

TEST_CASE("outputs never overwrite inputs") {
  const auto dir = tst::temp_dir("cli_guard");
  const auto bench = clean_bench(dir);
  const auto corpus = (bench / "corpus.cmx").string();
  const auto before = slurp(corpus);
  const auto r = run({"quantize", "--index", corpus, "--precision", "int8", "--out", corpus});
  CHECK(r.code == colmax::cli::kExitDataError);
  CHECK(r.err.find("InvalidArgument") != std::string::npos);
  CHECK(slurp(corpus) == before);
  fs::remove_all(dir);
}

TEST_CASE("merge averages parameter files") {
  using colmax::training::ParamSet;
  const auto dir = tst::temp_dir("cli_merge");
  colmax::training::save_params(ParamSet{{"w", {{2}, {1, 2}}}}, dir / "a.json");
  colmax::training::save_params(ParamSet{{"w", {{2}, {3, 6}}}}, dir / "b.json");
  auto r = run({"merge", "--inputs", (dir / "a.json").string() + "," + (dir / "b.json").string(), "--weights",
                "1,3", "--out", (dir / "m.json").string()});
  REQUIRE(r.code == 0);
  CHECK(colmax::training::load_params(dir / "m.json").at("w").values == std::vector<double>{2.5, 5.0});

  colmax::training::save_params(ParamSet{{"v", {{2}, {0, 0}}}}, dir / "c.json");
  r = run({"merge", "--inputs", (dir / "a.json").string() + "," + (dir / "c.json").string(), "--out",
           (dir / "bad.json").string()});
  CHECK(r.code == colmax::cli::kExitDataError);
  CHECK(r.err.find("NameSetMismatch") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("worker count does not change any output") {
  const auto dir = tst::temp_dir("cli_workers");
  const auto bench = clean_bench(dir);
  const auto index = (dir / "corpus.cmx").string();
  REQUIRE(run({"build-index", "--input", (bench / "corpus.cmx").string(), "--out", index}).code == 0);
  std::string first;
  for (const char* w : {"1", "3"}) {
    const auto r = run({"search", "--index", index, "--queries", (bench / "queries.cmx").string(), "--workers", w,
                        "--mode", "rerank", "--first-stage-k", "20"});
    REQUIRE(r.code == 0);
    if (first.empty()) first = r.out;
    CHECK(r.out == first);
  }

  const auto a = dir / "clusters1";
  const auto b = dir / "clusters3";
  REQUIRE(run({"sample-clusters", "--input", index, "--k-max", "4", "--reference-draws", "5", "--workers", "1",
               "--out", a.string()}).code == 0);
  REQUIRE(run({"sample-clusters", "--input", index, "--k-max", "4", "--reference-draws", "5", "--workers", "3",
               "--out", b.string()}).code == 0);
  for (const char* f : {"assignments.csv", "gap.csv", "sample.txt"}) CHECK(slurp(a / f) == slurp(b / f));

  const auto m1 = dir / "neg1.jsonl";
  const auto m3 = dir / "neg3.jsonl";
  for (const auto& [w, p] : {std::pair{"1", m1}, std::pair{"3", m3}}) {
    REQUIRE(run({"mine-negatives", "--index", index, "--queries", (bench / "queries.cmx").string(), "--qrels",
                 (bench / "qrels.txt").string(), "--workers", w, "--out", p.string()}).code == 0);
  }
  CHECK(slurp(m1) == slurp(m3));
  CHECK(!slurp(m1).empty());
  fs::remove_all(dir);
}

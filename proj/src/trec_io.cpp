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

#include "colmax/trec_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace colmax::eval {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  return out;
}

[[noreturn]] void bad_line(const char* what, std::size_t lineno, const std::string& line) {
  throw Error(ErrorCode::ParseError,
              std::string(what) + " line " + std::to_string(lineno) + ": '" + line + "'");
}

}  // namespace

Qrels parse_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string query, iter, doc, extra;
    long rel = 0;
    if (!(fields >> query)) continue;  // blank
    if (!(fields >> iter >> doc >> rel) || (fields >> extra)) bad_line("qrels", lineno, line);
    if (rel < 0 || rel > 64) bad_line("qrels", lineno, line);
    qrels.add(query, doc, static_cast<int>(rel));
  }
  return qrels;
}

Qrels read_qrels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_qrels(in);
}

void write_qrels(const Qrels& qrels, std::ostream& out) {
  for (const auto& [query, docs] : qrels.all()) {
    for (const auto& [doc, rel] : docs) out << query << " 0 " << doc << ' ' << rel << '\n';
  }
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_qrels(qrels, out);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

RunResult parse_run(std::istream& in) {
  std::map<std::string, std::vector<ScoredDoc>> grouped;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string query, q0, doc, tag, extra;
    long rank = 0;
    double score = 0.0;
    if (!(fields >> query)) continue;
    if (!(fields >> q0 >> doc >> rank >> score >> tag) || (fields >> extra)) {
      bad_line("run", lineno, line);
    }
    grouped[query].push_back({doc, score});
  }
  RunResult run;
  for (auto& [query, docs] : grouped) {
    std::stable_sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc_id < b.doc_id;
    });
    run.add(query, std::move(docs));
  }
  return run;
}

RunResult read_run(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_run(in);
}

void write_run(const RunResult& run, std::ostream& out, const std::string& tag) {
  char score[32];
  for (const auto& [query, docs] : run.all()) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      std::snprintf(score, sizeof(score), "%.9g", docs[i].score);
      out << query << " Q0 " << docs[i].doc_id << ' ' << (i + 1) << ' ' << score << ' ' << tag
          << '\n';
    }
  }
}

void write_run(const RunResult& run, const std::filesystem::path& path, const std::string& tag) {
  auto out = open_out(path);
  write_run(run, out, tag);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

}  // namespace colmax::eval

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

#include "colmax/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_set>

namespace colmax::eval {

void Qrels::add(const std::string& query_id, const std::string& doc_id, int relevance) {
  if (relevance < 0) {
    throw Error(ErrorCode::InvalidArgument, "negative relevance for (" + query_id + ", " + doc_id + ")");
  }
  if (!by_query_[query_id].emplace(doc_id, relevance).second) {
    throw Error(ErrorCode::DuplicateId, "duplicate judgment (" + query_id + ", " + doc_id + ")");
  }
}

int Qrels::relevance(const std::string& query_id, const std::string& doc_id) const {
  const auto* j = judgments(query_id);
  if (!j) return 0;
  const auto it = j->find(doc_id);
  return it == j->end() ? 0 : it->second;
}

const std::map<std::string, int>* Qrels::judgments(const std::string& query_id) const {
  const auto it = by_query_.find(query_id);
  return it == by_query_.end() ? nullptr : &it->second;
}

std::size_t Qrels::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [q, docs] : by_query_) n += docs.size();
  return n;
}

void RunResult::add(const std::string& query_id, std::vector<ScoredDoc> ranked) {
  std::unordered_set<std::string_view> seen;
  for (const auto& d : ranked) {
    if (!seen.insert(d.doc_id).second) {
      throw Error(ErrorCode::DuplicateId, "doc '" + d.doc_id + "' ranked twice for '" + query_id + "'");
    }
  }
  if (!by_query_.emplace(query_id, std::move(ranked)).second) {
    throw Error(ErrorCode::DuplicateId, "query '" + query_id + "' already in run");
  }
}

double dcg_at_k(const std::vector<int>& grades, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, grades.size());
  for (std::size_t i = 0; i < n; ++i) {
    dcg += (std::exp2(static_cast<double>(grades[i])) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

NdcgReport ndcg_at_k(const RunResult& run, const Qrels& qrels, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::NonPositiveK, "k must be at least 1");
  NdcgReport report;
  report.k = k;
  double total = 0.0;
  for (const auto& [query, judged] : qrels.all()) {
    std::vector<int> ideal;
    for (const auto& [doc, rel] : judged) {
      if (rel > 0) ideal.push_back(rel);
    }
    if (ideal.empty()) continue;
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    const double idcg = dcg_at_k(ideal, k);

    std::vector<int> got;
    if (const auto it = run.all().find(query); it != run.all().end()) {
      for (std::size_t i = 0; i < std::min(k, it->second.size()); ++i) {
        const auto rel = judged.find(it->second[i].doc_id);
        got.push_back(rel == judged.end() ? 0 : rel->second);
      }
    }
    const double value = dcg_at_k(got, k) / idcg;
    report.per_query.emplace(query, value);
    total += value;
  }
  if (report.per_query.empty()) {
    throw Error(ErrorCode::NoJudgedQueries, "no query has a relevant judgment");
  }
  report.mean = total / static_cast<double>(report.per_query.size());
  return report;
}

}  // namespace colmax::eval

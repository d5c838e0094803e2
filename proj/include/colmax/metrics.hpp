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

#pragma once

/// \file metrics.hpp
/// Relevance judgments, ranked runs and NDCG@k with exponential gain
/// (2^rel - 1) and log2(rank + 1) discount.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "colmax/maxsim.hpp"

namespace colmax::eval {

/// Graded judgments keyed by query then document.
class Qrels {
 public:
  /// Throws DuplicateId for a repeated (query, doc) pair, InvalidArgument for
  /// a negative grade.
  void add(const std::string& query_id, const std::string& doc_id, int relevance);

  /// 0 when the pair is unjudged.
  int relevance(const std::string& query_id, const std::string& doc_id) const;
  const std::map<std::string, int>* judgments(const std::string& query_id) const;
  const std::map<std::string, std::map<std::string, int>>& all() const noexcept { return by_query_; }
  std::size_t size() const noexcept;

 private:
  std::map<std::string, std::map<std::string, int>> by_query_;
};

/// Ranked documents per query, best first.
class RunResult {
 public:
  /// Throws DuplicateId when the doc list repeats an id or the query exists.
  void add(const std::string& query_id, std::vector<ScoredDoc> ranked);
  void add(const SearchResult& result) { add(result.query_id, result.hits); }

  const std::map<std::string, std::vector<ScoredDoc>>& all() const noexcept { return by_query_; }

 private:
  std::map<std::string, std::vector<ScoredDoc>> by_query_;
};

struct NdcgReport {
  std::size_t k = 0;
  std::map<std::string, double> per_query;  // judged queries only
  double mean = 0.0;
};

/// Queries with no relevant (grade > 0) judgment are left out of the mean;
/// judged queries missing from the run score 0.
/// Errors: NonPositiveK, NoJudgedQueries.
NdcgReport ndcg_at_k(const RunResult& run, const Qrels& qrels, std::size_t k);

/// DCG of a graded list truncated at k.
double dcg_at_k(const std::vector<int>& grades, std::size_t k);

}  // namespace colmax::eval

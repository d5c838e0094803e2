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

/// \file maxsim.hpp
/// Late-interaction scoring: for each query token take the best-matching
/// document token, then sum those maxima. Search is an exhaustive scan over
/// an IndexHandle; a pooled single-vector path and a pooled-then-MaxSim
/// rerank pipeline are provided for comparison.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"
#include "colmax/index_file.hpp"

namespace colmax {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Hits are sorted by descending score, ties by ascending doc_id.
struct SearchResult {
  std::string query_id;
  std::vector<ScoredDoc> hits;
  std::size_t k = 0;
};

struct SearchOptions {
  SimilarityKind sim = SimilarityKind::DOT;
  std::size_t workers = 1;  // 0 = hardware concurrency
};

/// Sum over query tokens of the max similarity against any document token.
/// Per-pair similarities are fp32; the sum over query tokens is in double.
double maxsim_score(const MultiVector& query, const MultiVector& doc,
                    SimilarityKind sim = SimilarityKind::DOT);

/// Same, against a row-major token block of `query.dim()` columns.
double maxsim_score(const MultiVector& query, std::span<const float> doc_tokens,
                    SimilarityKind sim = SimilarityKind::DOT);

/// Exhaustive top-k by MaxSim. Errors: DimMismatch, EmptyIndex, NonPositiveK.
SearchResult search(const MultiVector& query, const store::IndexHandle& index, std::size_t k,
                    const SearchOptions& opts = {});

/// L2-normalised mean of the token vectors. Throws ZeroVector.
Vector pooled_embedding(const MultiVector& mv);

/// Top-k by dot product of pooled query vs pooled documents.
SearchResult pooled_search(const MultiVector& query, const store::IndexHandle& index,
                           std::size_t k, const SearchOptions& opts = {});

/// Pooled first stage over the whole index, MaxSim (DOT) rerank of its top
/// `first_stage_k`, returning the best `final_k`.
SearchResult retrieve_then_rerank(const MultiVector& query, const store::IndexHandle& index,
                                  std::size_t first_stage_k, std::size_t final_k,
                                  const SearchOptions& opts = {});

/// Selects the top k of (index, score) pairs under the hit ordering.
std::vector<ScoredDoc> top_k(std::span<const double> scores, const store::IndexHandle& index,
                             std::size_t k);

}  // namespace colmax

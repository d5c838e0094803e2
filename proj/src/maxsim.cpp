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

#include "colmax/maxsim.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "colmax/parallel.hpp"

namespace colmax {
namespace {

struct Candidate {
  std::size_t doc;
  double score;
};

// Keeps the best k candidates, ordered by descending score then doc id.
void select_top(std::vector<Candidate>& cands, const store::IndexHandle& index, std::size_t k) {
  auto better = [&index](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return index.doc_id(a.doc) < index.doc_id(b.doc);
  };
  const std::size_t keep = std::min(k, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(keep), cands.end(), better);
  cands.resize(keep);
}

std::vector<ScoredDoc> rank(std::vector<Candidate> cands, const store::IndexHandle& index,
                            std::size_t k) {
  select_top(cands, index, k);
  std::vector<ScoredDoc> hits;
  hits.reserve(cands.size());
  for (const auto& c : cands) hits.push_back({index.doc_id(c.doc), c.score});
  return hits;
}

void check_query(const MultiVector& query, const store::IndexHandle& index, std::size_t k) {
  require_valid(query);
  if (k == 0) throw Error(ErrorCode::NonPositiveK, "k must be at least 1");
  if (index.size() == 0) throw Error(ErrorCode::EmptyIndex, "index has no documents");
  if (query.dim() != index.dim()) {
    throw Error(ErrorCode::DimMismatch, "query '" + query.id() + "' has dim " +
                                            std::to_string(query.dim()) + ", index dim " +
                                            std::to_string(index.dim()));
  }
}

// Doc tokens are the outer loop so each one is loaded once while the (small)
// query block stays hot. Max is exact, so the loop order does not affect the
// result; only the final sum fixes an order.
double maxsim_dot(const MultiVector& query, std::span<const float> doc, std::vector<float>& best) {
  const std::size_t dim = query.dim();
  const std::size_t nq = query.token_count();
  const std::size_t nd = doc.size() / dim;
  best.assign(nq, -std::numeric_limits<float>::infinity());
  for (std::size_t j = 0; j < nd; ++j) {
    const std::span<const float> d = doc.subspan(j * dim, dim);
    for (std::size_t i = 0; i < nq; ++i) best[i] = std::max(best[i], dot(query.token(i), d));
  }
  double total = 0.0;
  for (float b : best) total += b;
  return total;
}

double maxsim_cosine(const MultiVector& query, std::span<const float> doc) {
  const std::size_t dim = query.dim();
  const std::size_t nd = doc.size() / dim;
  double total = 0.0;
  for (std::size_t i = 0; i < query.token_count(); ++i) {
    float best = -std::numeric_limits<float>::infinity();
    for (std::size_t j = 0; j < nd; ++j) {
      best = std::max(best, similarity(query.token(i), doc.subspan(j * dim, dim),
                                       SimilarityKind::COSINE));
    }
    total += best;
  }
  return total;
}

}  // namespace

double maxsim_score(const MultiVector& query, std::span<const float> doc_tokens,
                    SimilarityKind sim) {
  if (query.dim() == 0 || doc_tokens.size() % query.dim() != 0) {
    throw Error(ErrorCode::DimMismatch, "document block is not a multiple of the query dim");
  }
  if (sim == SimilarityKind::COSINE) return maxsim_cosine(query, doc_tokens);
  std::vector<float> best;
  return maxsim_dot(query, doc_tokens, best);
}

double maxsim_score(const MultiVector& query, const MultiVector& doc, SimilarityKind sim) {
  require_valid(query);
  require_valid(doc);
  if (query.dim() != doc.dim()) {
    throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(query.dim()) +
                                            " vs doc dim " + std::to_string(doc.dim()));
  }
  return maxsim_score(query, doc.data(), sim);
}

std::vector<ScoredDoc> top_k(std::span<const double> scores, const store::IndexHandle& index,
                             std::size_t k) {
  std::vector<Candidate> cands(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) cands[i] = {i, scores[i]};
  return rank(std::move(cands), index, k);
}

SearchResult search(const MultiVector& query, const store::IndexHandle& index, std::size_t k,
                    const SearchOptions& opts) {
  check_query(query, index, k);
  std::vector<double> scores(index.size());
  parallel_blocks(index.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<float> best;
    for (std::size_t i = begin; i < end; ++i) {
      scores[i] = opts.sim == SimilarityKind::DOT
                      ? maxsim_dot(query, index.doc_tokens(i), best)
                      : maxsim_cosine(query, index.doc_tokens(i));
    }
  });
  return {query.id(), top_k(scores, index, k), k};
}

Vector pooled_embedding(const MultiVector& mv) {
  require_valid(mv);
  Vector out(mv.dim());
  if (!pool_tokens(mv.data(), out)) {
    throw Error(ErrorCode::ZeroVector, "'" + mv.id() + "' has a zero mean token vector");
  }
  return out;
}

SearchResult pooled_search(const MultiVector& query, const store::IndexHandle& index,
                           std::size_t k, const SearchOptions& opts) {
  check_query(query, index, k);
  const Vector q = pooled_embedding(query);
  std::vector<double> scores(index.size());
  parallel_blocks(index.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) scores[i] = dot(q, index.pooled(i));
  });
  return {query.id(), top_k(scores, index, k), k};
}

SearchResult retrieve_then_rerank(const MultiVector& query, const store::IndexHandle& index,
                                  std::size_t first_stage_k, std::size_t final_k,
                                  const SearchOptions& opts) {
  check_query(query, index, final_k);
  if (first_stage_k < final_k) {
    throw Error(ErrorCode::InvalidArgument, "first_stage_k must be >= final_k");
  }
  const Vector q = pooled_embedding(query);
  std::vector<Candidate> first(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) first[i] = {i, dot(q, index.pooled(i))};
  select_top(first, index, first_stage_k);

  parallel_blocks(first.size(), opts.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<float> best;
    for (std::size_t i = begin; i < end; ++i) {
      first[i].score = maxsim_dot(query, index.doc_tokens(first[i].doc), best);
    }
  });
  return {query.id(), rank(std::move(first), index, final_k), final_k};
}

}  // namespace colmax

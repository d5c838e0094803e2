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

#include "colmax/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "colmax/index_file.hpp"
#include "colmax/maxsim.hpp"
#include "colmax/projection.hpp"
#include "colmax/rng.hpp"

namespace colmax::eval {
namespace {

std::vector<float> sample_tokens(const std::vector<MultiVector>& corpus, std::size_t limit,
                                 std::uint64_t seed) {
  const std::size_t dim = corpus.front().dim();
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (std::size_t t = 0; t < corpus[d].token_count(); ++t) all.emplace_back(d, t);
  }
  std::vector<std::pair<std::size_t, std::size_t>> picked;
  Rng rng = make_rng(seed, 0x50ca);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), std::min(limit, all.size()), rng);
  std::vector<float> flat;
  flat.reserve(picked.size() * dim);
  for (const auto& [d, t] : picked) {
    const auto tok = corpus[d].token(t);
    flat.insert(flat.end(), tok.begin(), tok.end());
  }
  return flat;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

double ndcg_pct(double ndcg, double baseline_ndcg) {
  if (!(baseline_ndcg > 0.0)) throw Error(ErrorCode::InvalidArgument, "baseline NDCG must be positive");
  return std::round(100.0 * ndcg / baseline_ndcg * 100.0) / 100.0;
}

std::vector<AblationRow> ablation_rows(const std::vector<AblationConfig>& configs,
                                       const std::vector<store::StorageEstimate>& storage,
                                       const std::vector<double>& ndcg) {
  if (configs.empty() || configs.size() != storage.size() || configs.size() != ndcg.size()) {
    throw Error(ErrorCode::InvalidArgument, "ablation inputs must be non-empty and aligned");
  }
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    rows.push_back({configs[i].label, configs[i].dim, configs[i].precision,
                    storage[i].gib_rounded(), store::storage_ratio(storage[i], storage[0]),
                    ndcg[i], ndcg_pct(ndcg[i], ndcg[0])});
  }
  return rows;
}

std::vector<AblationRow> run_ablation(const std::vector<MultiVector>& corpus,
                                      const std::vector<MultiVector>& queries, const Qrels& qrels,
                                      const std::vector<AblationConfig>& configs,
                                      const AblationOptions& options) {
  if (configs.empty()) throw Error(ErrorCode::InvalidArgument, "no ablation configurations");
  if (corpus.empty()) throw Error(ErrorCode::EmptyIndex, "empty corpus");
  const std::size_t source_dim = corpus.front().dim();
  const std::uint64_t n_docs = options.storage_docs.value_or(corpus.size());
  const double avg_tokens =
      std::accumulate(corpus.begin(), corpus.end(), 0.0,
                      [](double s, const MultiVector& d) { return s + static_cast<double>(d.token_count()); }) /
      static_cast<double>(corpus.size());

  std::vector<store::StorageEstimate> storage;
  std::vector<double> ndcg;
  std::vector<float> sample;
  for (const auto& cfg : configs) {
    if (cfg.dim == 0 || cfg.dim > source_dim) {
      throw Error(ErrorCode::InvalidArgument, "configuration '" + cfg.label + "' dim " +
                                                  std::to_string(cfg.dim) + " exceeds corpus dim " +
                                                  std::to_string(source_dim));
    }
    std::vector<MultiVector> docs;
    std::vector<MultiVector> qs;
    if (cfg.dim < source_dim) {
      if (sample.empty()) sample = sample_tokens(corpus, options.projection_sample, options.seed);
      const auto proj = store::fit_projection(sample, source_dim, cfg.dim);
      docs.reserve(corpus.size());
      for (const auto& d : corpus) docs.push_back(store::apply_projection(d, proj, true));
      for (const auto& q : queries) qs.push_back(store::apply_projection(q, proj, true));
    }
    const auto& use_docs = docs.empty() ? corpus : docs;
    const auto& use_queries = qs.empty() ? queries : qs;

    const auto index = store::IndexHandle::build(use_docs, cfg.precision, true);
    RunResult run;
    SearchOptions so;
    so.workers = options.workers;
    for (const auto& q : use_queries) run.add(search(normalized(q), index, options.k, so));
    ndcg.push_back(ndcg_at_k(run, qrels, options.k).mean);
    storage.push_back(store::estimate_storage(n_docs, avg_tokens,
                                              static_cast<std::uint32_t>(cfg.dim), cfg.precision));
  }
  return ablation_rows(configs, storage, ndcg);
}

std::string to_csv(const std::vector<AblationRow>& rows) {
  std::string out = "label,dim,precision,storage_gib,storage_pct,ndcg,ndcg_pct\n";
  for (const auto& r : rows) {
    out += r.label + ',' + std::to_string(r.embed_dim) + ',' +
           std::string(precision_name(r.precision)) + ',' + fmt("%.1f", r.storage_gib) + ',' +
           std::to_string(r.storage_pct) + ',' + fmt("%.4f", r.ndcg) + ',' +
           fmt("%.2f", r.ndcg_pct) + '\n';
  }
  return out;
}

std::string to_markdown(const std::vector<AblationRow>& rows) {
  std::string out =
      "| label | dim | precision | storage (GiB) | % storage | NDCG | % NDCG |\n"
      "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out += "| " + r.label + " | " + std::to_string(r.embed_dim) + " | " +
           std::string(precision_name(r.precision)) + " | " + fmt("%.1f", r.storage_gib) + " | " +
           std::to_string(r.storage_pct) + "% | " + fmt("%.4f", r.ndcg) + " | " +
           fmt("%.2f", r.ndcg_pct) + "% |\n";
  }
  return out;
}

}  // namespace colmax::eval

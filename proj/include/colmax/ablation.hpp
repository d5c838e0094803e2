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

/// \file ablation.hpp
/// Embedding-size ablation: for each (dim, precision) configuration project,
/// quantize, index, search and score, then report storage and NDCG relative
/// to the first configuration.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "colmax/metrics.hpp"
#include "colmax/storage.hpp"

namespace colmax::eval {

struct AblationConfig {
  std::string label;
  std::size_t dim = 0;
  Precision precision = Precision::FP16;
};

struct AblationRow {
  std::string label;
  std::size_t embed_dim = 0;
  Precision precision = Precision::FP16;
  double storage_gib = 0.0;  // rounded to 0.1
  int storage_pct = 0;
  double ndcg = 0.0;
  double ndcg_pct = 0.0;     // rounded to two decimals
};

/// 100 * ndcg / baseline rounded to two decimals.
double ndcg_pct(double ndcg, double baseline_ndcg);

/// Pure bookkeeping: the first entry is the baseline.
std::vector<AblationRow> ablation_rows(const std::vector<AblationConfig>& configs,
                                       const std::vector<store::StorageEstimate>& storage,
                                       const std::vector<double>& ndcg);

struct AblationOptions {
  std::size_t k = 10;
  /// Corpus size used for the storage columns; the actual corpus size if unset.
  std::optional<std::uint64_t> storage_docs;
  /// Tokens sampled (deterministically) to fit each projection.
  std::size_t projection_sample = 50000;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Errors: InvalidArgument (no configs, dim above the corpus dim), plus
/// whatever projection, indexing or evaluation raise.
std::vector<AblationRow> run_ablation(const std::vector<MultiVector>& corpus,
                                      const std::vector<MultiVector>& queries, const Qrels& qrels,
                                      const std::vector<AblationConfig>& configs,
                                      const AblationOptions& options = {});

/// Header: label,dim,precision,storage_gib,storage_pct,ndcg,ndcg_pct
std::string to_csv(const std::vector<AblationRow>& rows);
std::string to_markdown(const std::vector<AblationRow>& rows);

}  // namespace colmax::eval

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

/// \file storage.hpp
/// Embedding storage arithmetic for multi-vector corpora.
///
/// Sizes are reported in GiB (2^30 bytes): 773 tokens x 4096 dims x fp16 over
/// one million pages is 5897.5 GiB (decimal gigabytes would give 6332.4).

#include <cstdint>
#include <string>

#include "colmax/core_model.hpp"

namespace colmax::store {

struct StorageEstimate {
  std::uint64_t n_docs = 0;
  double avg_tokens = 0.0;
  std::uint32_t dim = 0;
  Precision precision = Precision::FP16;
  std::uint64_t floats_per_image = 0;  // round(avg_tokens) * dim
  std::uint64_t total_bytes = 0;
  double total_gib = 0.0;              // total_bytes / 2^30, unrounded

  /// total_gib rounded half-away-from-zero to one decimal.
  double gib_rounded() const;
  /// e.g. "5897.5"
  std::string gib_text() const;
};

/// Bytes for one token: 4D, 2D, D + 4 (INT8 scale), ceil(D / 8).
std::uint64_t storage_bytes_per_token(Precision p, std::uint32_t dim) noexcept;

/// Throws InvalidArgument unless every argument is positive.
StorageEstimate estimate_storage(std::uint64_t n_docs, double avg_tokens, std::uint32_t dim,
                                 Precision precision);

/// round(100 * reduced / baseline), halves rounded up. Both estimates must
/// describe the same corpus (n_docs, avg_tokens).
int storage_ratio(const StorageEstimate& reduced, const StorageEstimate& baseline);

}  // namespace colmax::store

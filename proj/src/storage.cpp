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

#include "colmax/storage.hpp"

#include <cmath>
#include <cstdio>

namespace colmax::store {
namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

double StorageEstimate::gib_rounded() const { return std::round(total_gib * 10.0) / 10.0; }

std::string StorageEstimate::gib_text() const {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", gib_rounded());
  return buf;
}

std::uint64_t storage_bytes_per_token(Precision p, std::uint32_t dim) noexcept {
  const std::uint64_t d = dim;
  switch (p) {
    case Precision::FP32: return 4 * d;
    case Precision::FP16: return 2 * d;
    case Precision::INT8: return d + 4;
    case Precision::BINARY: return (d + 7) / 8;
  }
  return 0;
}

StorageEstimate estimate_storage(std::uint64_t n_docs, double avg_tokens, std::uint32_t dim,
                                 Precision precision) {
  if (n_docs == 0 || dim == 0 || !(avg_tokens > 0.0) || !std::isfinite(avg_tokens)) {
    throw Error(ErrorCode::InvalidArgument, "storage estimate needs positive arguments");
  }
  StorageEstimate e;
  e.n_docs = n_docs;
  e.avg_tokens = avg_tokens;
  e.dim = dim;
  e.precision = precision;
  e.floats_per_image = static_cast<std::uint64_t>(std::llround(avg_tokens)) * dim;
  const long double bytes = static_cast<long double>(n_docs) * avg_tokens *
                            static_cast<long double>(storage_bytes_per_token(precision, dim));
  e.total_bytes = static_cast<std::uint64_t>(std::llround(bytes));
  e.total_gib = static_cast<double>(e.total_bytes) / 1073741824.0;
  return e;
}

int storage_ratio(const StorageEstimate& reduced, const StorageEstimate& baseline) {
  if (reduced.n_docs != baseline.n_docs || reduced.avg_tokens != baseline.avg_tokens) {
    throw Error(ErrorCode::InvalidArgument, "storage ratio across different corpora");
  }
  if (baseline.total_bytes == 0) throw Error(ErrorCode::InvalidArgument, "empty baseline");
  const u128 r = reduced.total_bytes;
  const u128 b = baseline.total_bytes;
  return static_cast<int>((200 * r + b) / (2 * b));
}

}  // namespace colmax::store

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

/// \file quantize.hpp
/// Per-token precision reduction for stored document embeddings.
///
/// Encoded token layouts (little-endian):
///   FP32   dim x float32
///   FP16   dim x binary16
///   INT8   float32 scale, then dim x int8 with value = element * scale.
///          scale = max|x| / 127, elements clamped to [-127, 127].
///   BINARY dim / 8 bytes, bit i stored at byte i / 8, bit position i % 8
///          (LSB first); bit = 1 iff x > 0. Scoring uses +-1/sqrt(dim).

#include <cstdint>
#include <span>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::store {

/// Writes one token into `out`, which must be exactly bytes_per_token(p, dim).
void encode_token(std::span<const float> token, Precision p, std::span<std::uint8_t> out);

/// Reconstructs the scoring vector for one encoded token.
void decode_token(std::span<const std::uint8_t> in, Precision p, std::span<float> out);

/// Symmetric absmax scale for INT8; zero for an all-zero token.
float int8_scale(std::span<const float> token) noexcept;

struct QuantizedTokens {
  Precision precision;
  std::vector<std::uint8_t> payload;
  MultiVector dequantized;
};

QuantizedTokens quantize_tokens(const MultiVector& mv, Precision p);

}  // namespace colmax::store

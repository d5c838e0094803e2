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

/// \file core_model.hpp
/// Shared domain types for late-interaction retrieval: token vectors,
/// multi-vector documents/queries, storage precisions and the error type
/// every module throws.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace colmax {

enum class ErrorCode {
  EmptyTokens,
  DimMismatch,
  NonFiniteValue,
  EmptyId,
  ZeroVector,
  EmptyIndex,
  InvalidArgument,
  DuplicateId,
  BinaryDimNotByteAligned,
  IoFailure,
  FormatError,
  InsufficientSample,
  RankDeficient,
  InsufficientTargetReduction,
  MissingPositiveScore,
  NonPositiveK,
  KTooLarge,
  DegenerateData,
  UnsupportedSimilarity,
  ShapeMismatch,
  NameSetMismatch,
  NoJudgedQueries,
  ParseError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Error raised by every colmax operation. `what()` holds the message only;
/// the code is reported separately so callers can print "<code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A single token embedding.
using Vector = std::vector<float>;

enum class Precision : std::uint8_t { FP32 = 0, FP16 = 1, INT8 = 2, BINARY = 3 };

enum class SimilarityKind { DOT, COSINE };

std::string_view precision_name(Precision p) noexcept;
/// Accepts "fp32", "fp16", "int8", "binary" (case-insensitive).
Precision parse_precision(std::string_view text);
/// Throws FormatError for codes outside 0..3.
Precision precision_from_code(std::uint8_t code);

/// Encoded bytes for one token of `dim` elements, INT8 including its fp32 scale.
/// BINARY requires dim % 8 == 0.
std::size_t bytes_per_token(Precision p, std::size_t dim);

/// One document page or query: an ordered run of equal-width token vectors,
/// stored row-major in a single buffer.
class MultiVector {
 public:
  MultiVector() = default;
  /// `data.size()` must be a multiple of `dim`.
  MultiVector(std::string id, std::size_t dim, std::vector<float> data);

  /// Builds from per-token vectors; throws the first validation failure.
  static MultiVector from_tokens(std::string id, const std::vector<Vector>& tokens);

  const std::string& id() const noexcept { return id_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t token_count() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::span<const float> token(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<float> token(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  void set_id(std::string id) { id_ = std::move(id); }
  /// Appends one token; its size must equal dim().
  void push_token(std::span<const float> values);

  friend bool operator==(const MultiVector&, const MultiVector&) = default;

 private:
  std::string id_;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct ValidationError {
  ErrorCode code;
  std::size_t token = 0;
  std::size_t coordinate = 0;

  std::string message() const;
};

/// Checks a ragged token list as it would arrive from an encoder.
std::optional<ValidationError> validate_multivector(std::string_view id,
                                                    const std::vector<Vector>& tokens);
std::optional<ValidationError> validate_multivector(const MultiVector& mv);

/// Throws Error when `validate_multivector` reports a problem.
void require_valid(const MultiVector& mv);

// Single-vector kernels shared by scoring, pooling and projection.

/// Dot product with eight fixed accumulation lanes; the summation order is a
/// function of the length only.
float dot(std::span<const float> a, std::span<const float> b) noexcept;
double l2_norm(std::span<const float> a) noexcept;
/// In-place L2 normalisation; throws ZeroVector on an all-zero input.
void normalize(std::span<float> v);
/// DOT, or cosine; cosine throws ZeroVector when either side has zero norm.
float similarity(std::span<const float> a, std::span<const float> b, SimilarityKind kind);

/// Mean of row-major `tokens` (n x out.size()) written to `out`, then
/// L2-normalised. Returns false, leaving zeros, when the mean is exactly zero.
bool pool_tokens(std::span<const float> tokens, std::span<float> out);

/// Returns a copy with every token L2-normalised.
MultiVector normalized(const MultiVector& mv);

}  // namespace colmax

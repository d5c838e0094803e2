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

#include "colmax/core_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace colmax {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyTokens: return "EmptyTokens";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::BinaryDimNotByteAligned: return "BinaryDimNotByteAligned";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InsufficientSample: return "InsufficientSample";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InsufficientTargetReduction: return "InsufficientTargetReduction";
    case ErrorCode::MissingPositiveScore: return "MissingPositiveScore";
    case ErrorCode::NonPositiveK: return "NonPositiveK";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::UnsupportedSimilarity: return "UnsupportedSimilarity";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NameSetMismatch: return "NameSetMismatch";
    case ErrorCode::NoJudgedQueries: return "NoJudgedQueries";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string_view precision_name(Precision p) noexcept {
  switch (p) {
    case Precision::FP32: return "fp32";
    case Precision::FP16: return "fp16";
    case Precision::INT8: return "int8";
    case Precision::BINARY: return "binary";
  }
  return "unknown";
}

Precision parse_precision(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "fp32") return Precision::FP32;
  if (lower == "fp16") return Precision::FP16;
  if (lower == "int8") return Precision::INT8;
  if (lower == "binary") return Precision::BINARY;
  throw Error(ErrorCode::InvalidArgument, "unknown precision '" + std::string(text) + "'");
}

Precision precision_from_code(std::uint8_t code) {
  if (code > 3) {
    throw Error(ErrorCode::FormatError, "unknown precision code " + std::to_string(code));
  }
  return static_cast<Precision>(code);
}

std::size_t bytes_per_token(Precision p, std::size_t dim) {
  switch (p) {
    case Precision::FP32: return dim * 4;
    case Precision::FP16: return dim * 2;
    case Precision::INT8: return dim + 4;
    case Precision::BINARY:
      if (dim % 8 != 0) {
        throw Error(ErrorCode::BinaryDimNotByteAligned,
                    "binary precision needs dim divisible by 8, got " + std::to_string(dim));
      }
      return dim / 8;
  }
  return 0;
}

MultiVector::MultiVector(std::string id, std::size_t dim, std::vector<float> data)
    : id_(std::move(id)), dim_(dim), data_(std::move(data)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "dim must be positive");
  if (data_.size() % dim_ != 0) {
    throw Error(ErrorCode::DimMismatch, "buffer of " + std::to_string(data_.size()) +
                                            " floats is not a multiple of dim " +
                                            std::to_string(dim_));
  }
}

MultiVector MultiVector::from_tokens(std::string id, const std::vector<Vector>& tokens) {
  if (auto err = validate_multivector(id, tokens)) throw Error(err->code, err->message());
  const std::size_t dim = tokens.front().size();
  std::vector<float> data;
  data.reserve(dim * tokens.size());
  for (const auto& t : tokens) data.insert(data.end(), t.begin(), t.end());
  return MultiVector(std::move(id), dim, std::move(data));
}

void MultiVector::push_token(std::span<const float> values) {
  if (dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    throw Error(ErrorCode::DimMismatch, "token of dim " + std::to_string(values.size()) +
                                            " pushed onto dim " + std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

std::string ValidationError::message() const {
  switch (code) {
    case ErrorCode::EmptyTokens: return "multi-vector has no tokens";
    case ErrorCode::EmptyId: return "multi-vector id is empty";
    case ErrorCode::DimMismatch:
      return "token " + std::to_string(token) + " has a different dim than token 0";
    case ErrorCode::NonFiniteValue:
      return "token " + std::to_string(token) + " coordinate " + std::to_string(coordinate) +
             " is not finite";
    default: return std::string(error_code_name(code));
  }
}

std::optional<ValidationError> validate_multivector(std::string_view id,
                                                    const std::vector<Vector>& tokens) {
  if (id.empty()) return ValidationError{ErrorCode::EmptyId};
  if (tokens.empty() || tokens.front().empty()) return ValidationError{ErrorCode::EmptyTokens};
  const std::size_t dim = tokens.front().size();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].size() != dim) return ValidationError{ErrorCode::DimMismatch, t};
    for (std::size_t c = 0; c < dim; ++c) {
      if (!std::isfinite(tokens[t][c])) return ValidationError{ErrorCode::NonFiniteValue, t, c};
    }
  }
  return std::nullopt;
}

std::optional<ValidationError> validate_multivector(const MultiVector& mv) {
  if (mv.id().empty()) return ValidationError{ErrorCode::EmptyId};
  if (mv.token_count() == 0) return ValidationError{ErrorCode::EmptyTokens};
  const auto data = mv.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      return ValidationError{ErrorCode::NonFiniteValue, i / mv.dim(), i % mv.dim()};
    }
  }
  return std::nullopt;
}

void require_valid(const MultiVector& mv) {
  if (auto err = validate_multivector(mv)) {
    throw Error(err->code, "'" + mv.id() + "': " + err->message());
  }
}

float dot(std::span<const float> a, std::span<const float> b) noexcept {
  const std::size_t n = std::min(a.size(), b.size());
  std::array<float, 8> acc{};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  for (std::size_t j = 0; i < n; ++i, ++j) acc[j] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

double l2_norm(std::span<const float> a) noexcept {
  double s = 0.0;
  for (float x : a) s += static_cast<double>(x) * x;
  return std::sqrt(s);
}

void normalize(std::span<float> v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw Error(ErrorCode::ZeroVector, "cannot normalise a zero vector");
  for (float& x : v) x = static_cast<float>(x / n);
}

float similarity(std::span<const float> a, std::span<const float> b, SimilarityKind kind) {
  const float d = dot(a, b);
  if (kind == SimilarityKind::DOT) return d;
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  }
  return static_cast<float>(d / (na * nb));
}

bool pool_tokens(std::span<const float> tokens, std::span<float> out) {
  const std::size_t dim = out.size();
  const std::size_t n = dim == 0 ? 0 : tokens.size() / dim;
  std::vector<double> mean(dim, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < dim; ++c) mean[c] += tokens[t * dim + c];
  }
  double sq = 0.0;
  for (double& m : mean) {
    m /= static_cast<double>(n);
    sq += m * m;
  }
  if (n == 0 || sq == 0.0) {
    std::fill(out.begin(), out.end(), 0.0f);
    return false;
  }
  const double norm = std::sqrt(sq);
  for (std::size_t c = 0; c < dim; ++c) out[c] = static_cast<float>(mean[c] / norm);
  return true;
}

MultiVector normalized(const MultiVector& mv) {
  MultiVector out = mv;
  for (std::size_t t = 0; t < out.token_count(); ++t) normalize(out.token(t));
  return out;
}

}  // namespace colmax

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

#include "colmax/quantize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "colmax/fp16.hpp"

namespace colmax::store {
namespace {

template <typename T>
void put_le(std::uint8_t* dst, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  std::memcpy(dst, &value, sizeof(T));
}

template <typename T>
T get_le(const std::uint8_t* src) {
  T value;
  std::memcpy(&value, src, sizeof(T));
  return value;
}

void check_size(std::size_t got, Precision p, std::size_t dim) {
  if (got != bytes_per_token(p, dim)) {
    throw Error(ErrorCode::FormatError, "token buffer of " + std::to_string(got) +
                                            " bytes does not match " +
                                            std::string(precision_name(p)) + " dim " +
                                            std::to_string(dim));
  }
}

}  // namespace

float int8_scale(std::span<const float> token) noexcept {
  float max_abs = 0.0f;
  for (float x : token) max_abs = std::max(max_abs, std::fabs(x));
  return max_abs / 127.0f;
}

void encode_token(std::span<const float> token, Precision p, std::span<std::uint8_t> out) {
  const std::size_t dim = token.size();
  check_size(out.size(), p, dim);
  switch (p) {
    case Precision::FP32:
      for (std::size_t i = 0; i < dim; ++i) put_le(out.data() + 4 * i, token[i]);
      break;
    case Precision::FP16:
      for (std::size_t i = 0; i < dim; ++i) put_le(out.data() + 2 * i, float_to_half(token[i]));
      break;
    case Precision::INT8: {
      const float scale = int8_scale(token);
      put_le(out.data(), scale);
      for (std::size_t i = 0; i < dim; ++i) {
        long q = 0;
        if (scale > 0.0f) {
          q = std::lround(static_cast<double>(token[i]) / static_cast<double>(scale));
          q = std::clamp(q, -127L, 127L);
        }
        out[4 + i] = static_cast<std::uint8_t>(static_cast<std::int8_t>(q));
      }
      break;
    }
    case Precision::BINARY:
      std::fill(out.begin(), out.end(), std::uint8_t{0});
      for (std::size_t i = 0; i < dim; ++i) {
        if (token[i] > 0.0f) out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
      }
      break;
  }
}

void decode_token(std::span<const std::uint8_t> in, Precision p, std::span<float> out) {
  const std::size_t dim = out.size();
  check_size(in.size(), p, dim);
  switch (p) {
    case Precision::FP32:
      for (std::size_t i = 0; i < dim; ++i) out[i] = get_le<float>(in.data() + 4 * i);
      break;
    case Precision::FP16:
      for (std::size_t i = 0; i < dim; ++i) {
        out[i] = half_to_float(get_le<std::uint16_t>(in.data() + 2 * i));
      }
      break;
    case Precision::INT8: {
      const double scale = get_le<float>(in.data());
      for (std::size_t i = 0; i < dim; ++i) {
        out[i] = static_cast<float>(static_cast<std::int8_t>(in[4 + i]) * scale);
      }
      break;
    }
    case Precision::BINARY: {
      const float unit = static_cast<float>(1.0 / std::sqrt(static_cast<double>(dim)));
      for (std::size_t i = 0; i < dim; ++i) {
        out[i] = ((in[i / 8] >> (i % 8)) & 1u) ? unit : -unit;
      }
      break;
    }
  }
}

QuantizedTokens quantize_tokens(const MultiVector& mv, Precision p) {
  require_valid(mv);
  const std::size_t dim = mv.dim();
  const std::size_t stride = bytes_per_token(p, dim);
  QuantizedTokens q{p, std::vector<std::uint8_t>(stride * mv.token_count()),
                    MultiVector(mv.id(), dim, std::vector<float>(mv.data().size()))};
  for (std::size_t t = 0; t < mv.token_count(); ++t) {
    std::span<std::uint8_t> slot(q.payload.data() + t * stride, stride);
    encode_token(mv.token(t), p, slot);
    decode_token(slot, p, q.dequantized.token(t));
  }
  return q;
}

}  // namespace colmax::store

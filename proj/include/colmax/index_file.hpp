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

/// \file index_file.hpp
/// Immutable on-disk multi-vector index ("CMX1", version 1).
///
/// Layout, all integers little-endian:
///
///   header    magic "CMX1" | u16 version | u32 dim | u8 precision |
///             u8 normalized | u64 doc_count                     (20 bytes)
///   doc table per doc: u16 id_len | id bytes (UTF-8) | u32 token_count |
///             u64 payload_offset
///   payload   concatenated encoded tokens (see quantize.hpp)
///
/// payload_offset is relative to the first payload byte. Documents are laid
/// out in table order with no gaps, so offsets are strictly increasing.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::store {

inline constexpr std::array<char, 4> kIndexMagic{'C', 'M', 'X', '1'};
inline constexpr std::uint16_t kIndexVersion = 1;
inline constexpr std::size_t kIndexHeaderSize = 20;

struct IndexHeader {
  std::uint16_t version = kIndexVersion;
  std::uint32_t dim = 0;
  Precision precision = Precision::FP32;
  bool normalized = false;
  std::uint64_t doc_count = 0;
};

struct DocRecord {
  std::string doc_id;
  std::uint32_t token_count = 0;
  std::uint64_t payload_offset = 0;
};

/// A sealed index held in memory: the encoded payload (kept verbatim so a
/// reload can be rewritten byte-for-byte) plus the decoded scoring vectors
/// and pooled per-document embeddings used by search.
class IndexHandle {
 public:
  /// Validates the table against the payload and decodes every token.
  IndexHandle(IndexHeader header, std::vector<DocRecord> records,
              std::vector<std::uint8_t> payload);

  /// In-memory build; see build_index for the contract.
  static IndexHandle build(std::span<const MultiVector> docs, Precision precision,
                           bool normalize);

  static IndexHandle deserialize(std::span<const std::uint8_t> bytes);
  static IndexHandle load(const std::filesystem::path& path);

  std::vector<std::uint8_t> serialize() const;
  void save(const std::filesystem::path& path) const;

  const IndexHeader& header() const noexcept { return header_; }
  std::size_t dim() const noexcept { return header_.dim; }
  Precision precision() const noexcept { return header_.precision; }
  bool normalized() const noexcept { return header_.normalized; }
  std::size_t size() const noexcept { return records_.size(); }

  const std::vector<DocRecord>& records() const noexcept { return records_; }
  const std::string& doc_id(std::size_t i) const { return records_[i].doc_id; }
  std::size_t token_count(std::size_t i) const { return records_[i].token_count; }

  /// Decoded scoring vectors of document i, row-major token_count(i) x dim.
  std::span<const float> doc_tokens(std::size_t i) const {
    return {tokens_.data() + token_begin_[i] * dim(), token_count(i) * dim()};
  }
  /// Decoded document as a standalone MultiVector.
  MultiVector document(std::size_t i) const;
  std::vector<MultiVector> documents() const;

  /// L2-normalised mean of the decoded tokens; all zeros when the mean is zero.
  std::span<const float> pooled(std::size_t i) const {
    return {pooled_.data() + i * dim(), dim()};
  }

  std::span<const std::uint8_t> payload() const noexcept { return payload_; }
  double average_tokens() const noexcept;

 private:
  IndexHeader header_;
  std::vector<DocRecord> records_;
  std::vector<std::uint8_t> payload_;
  std::vector<std::size_t> token_begin_;
  std::vector<float> tokens_;
  std::vector<float> pooled_;
};

/// Encodes `docs` at `precision` (optionally L2-normalising every token
/// first), writes the file and returns the reloaded handle.
/// Errors: DuplicateId, DimMismatch, BinaryDimNotByteAligned, IoFailure,
/// plus validation errors of the inputs.
IndexHandle build_index(std::span<const MultiVector> docs, Precision precision, bool normalize,
                        const std::filesystem::path& path);

/// Convenience for collections stored as FP32 index files (corpora, queries).
std::vector<MultiVector> load_multivectors(const std::filesystem::path& path);

}  // namespace colmax::store

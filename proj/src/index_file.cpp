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

#include "colmax/index_file.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "colmax/quantize.hpp"

namespace colmax::store {
namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::span<const std::uint8_t> rest() const { return in_.subspan(pos_); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(ErrorCode::FormatError, "index file truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

IndexHandle::IndexHandle(IndexHeader header, std::vector<DocRecord> records,
                         std::vector<std::uint8_t> payload)
    : header_(header), records_(std::move(records)), payload_(std::move(payload)) {
  if (header_.version != kIndexVersion) {
    throw Error(ErrorCode::FormatError, "unsupported index version " +
                                            std::to_string(header_.version));
  }
  if (header_.dim == 0) throw Error(ErrorCode::FormatError, "index dim is zero");
  if (records_.empty()) throw Error(ErrorCode::EmptyIndex, "index has no documents");
  if (header_.doc_count != records_.size()) {
    throw Error(ErrorCode::FormatError, "doc_count disagrees with the doc table");
  }
  const std::size_t stride = bytes_per_token(header_.precision, header_.dim);

  std::size_t total_tokens = 0;
  std::uint64_t expected_offset = 0;
  std::unordered_set<std::string_view> seen;
  token_begin_.reserve(records_.size());
  for (const auto& r : records_) {
    if (r.doc_id.empty()) throw Error(ErrorCode::FormatError, "empty doc id in table");
    if (!seen.insert(r.doc_id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate doc id '" + r.doc_id + "'");
    }
    if (r.token_count == 0) {
      throw Error(ErrorCode::EmptyTokens, "doc '" + r.doc_id + "' has no tokens");
    }
    if (r.payload_offset != expected_offset) {
      throw Error(ErrorCode::FormatError, "doc '" + r.doc_id + "' payload offset " +
                                              std::to_string(r.payload_offset) + ", expected " +
                                              std::to_string(expected_offset));
    }
    token_begin_.push_back(total_tokens);
    total_tokens += r.token_count;
    expected_offset += static_cast<std::uint64_t>(r.token_count) * stride;
  }
  if (expected_offset != payload_.size()) {
    throw Error(ErrorCode::FormatError, "payload is " + std::to_string(payload_.size()) +
                                            " bytes, doc table implies " +
                                            std::to_string(expected_offset));
  }

  const std::size_t dim = header_.dim;
  tokens_.resize(total_tokens * dim);
  for (std::size_t t = 0; t < total_tokens; ++t) {
    decode_token({payload_.data() + t * stride, stride}, header_.precision,
                 {tokens_.data() + t * dim, dim});
  }
  pooled_.resize(records_.size() * dim);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    pool_tokens(doc_tokens(i), {pooled_.data() + i * dim, dim});
  }
}

IndexHandle IndexHandle::build(std::span<const MultiVector> docs, Precision precision,
                               bool normalize) {
  if (docs.empty()) throw Error(ErrorCode::EmptyIndex, "no documents to index");
  const std::size_t dim = docs.front().dim();
  const std::size_t stride = bytes_per_token(precision, dim);

  std::vector<DocRecord> records;
  records.reserve(docs.size());
  std::vector<std::uint8_t> payload;
  std::unordered_set<std::string_view> seen;
  std::vector<float> scratch(dim);
  for (const auto& doc : docs) {
    require_valid(doc);
    if (doc.dim() != dim) {
      throw Error(ErrorCode::DimMismatch, "doc '" + doc.id() + "' has dim " +
                                              std::to_string(doc.dim()) + ", index dim " +
                                              std::to_string(dim));
    }
    if (!seen.insert(doc.id()).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate doc id '" + doc.id() + "'");
    }
    if (doc.id().size() > 0xffff) {
      throw Error(ErrorCode::InvalidArgument, "doc id longer than 65535 bytes");
    }
    records.push_back({doc.id(), static_cast<std::uint32_t>(doc.token_count()),
                       static_cast<std::uint64_t>(payload.size())});
    for (std::size_t t = 0; t < doc.token_count(); ++t) {
      std::copy(doc.token(t).begin(), doc.token(t).end(), scratch.begin());
      if (normalize) colmax::normalize(scratch);
      const std::size_t at = payload.size();
      payload.resize(at + stride);
      encode_token(scratch, precision, {payload.data() + at, stride});
    }
  }
  IndexHeader header;
  header.dim = static_cast<std::uint32_t>(dim);
  header.precision = precision;
  header.normalized = normalize;
  header.doc_count = records.size();
  return IndexHandle(header, std::move(records), std::move(payload));
}

std::vector<std::uint8_t> IndexHandle::serialize() const {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.put_bytes(kIndexMagic.data(), kIndexMagic.size());
  w.put(header_.version);
  w.put(header_.dim);
  w.put(static_cast<std::uint8_t>(header_.precision));
  w.put(static_cast<std::uint8_t>(header_.normalized ? 1 : 0));
  w.put(header_.doc_count);
  for (const auto& r : records_) {
    w.put(static_cast<std::uint16_t>(r.doc_id.size()));
    w.put_bytes(r.doc_id.data(), r.doc_id.size());
    w.put(r.token_count);
    w.put(r.payload_offset);
  }
  w.put_bytes(payload_.data(), payload_.size());
  return out;
}

IndexHandle IndexHandle::deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.get_string(4) != std::string(kIndexMagic.data(), kIndexMagic.size())) {
    throw Error(ErrorCode::FormatError, "bad magic, not a CMX1 index");
  }
  IndexHeader h;
  h.version = r.get<std::uint16_t>();
  if (h.version != kIndexVersion) {
    throw Error(ErrorCode::FormatError, "unsupported index version " + std::to_string(h.version));
  }
  h.dim = r.get<std::uint32_t>();
  h.precision = precision_from_code(r.get<std::uint8_t>());
  const auto norm_byte = r.get<std::uint8_t>();
  if (norm_byte > 1) throw Error(ErrorCode::FormatError, "normalized flag must be 0 or 1");
  h.normalized = norm_byte == 1;
  h.doc_count = r.get<std::uint64_t>();

  // Each table entry is at least 15 bytes; reject absurd counts before reserving.
  if (h.doc_count > bytes.size() / 15) {
    throw Error(ErrorCode::FormatError, "doc_count exceeds file size");
  }
  std::vector<DocRecord> records;
  records.reserve(h.doc_count);
  for (std::uint64_t i = 0; i < h.doc_count; ++i) {
    DocRecord rec;
    const auto len = r.get<std::uint16_t>();
    rec.doc_id = r.get_string(len);
    rec.token_count = r.get<std::uint32_t>();
    rec.payload_offset = r.get<std::uint64_t>();
    records.push_back(std::move(rec));
  }
  const auto rest = r.rest();
  return IndexHandle(h, std::move(records), std::vector<std::uint8_t>(rest.begin(), rest.end()));
}

IndexHandle IndexHandle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed: " + path.string());
  return deserialize(bytes);
}

void IndexHandle::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

MultiVector IndexHandle::document(std::size_t i) const {
  const auto t = doc_tokens(i);
  return MultiVector(doc_id(i), dim(), std::vector<float>(t.begin(), t.end()));
}

std::vector<MultiVector> IndexHandle::documents() const {
  std::vector<MultiVector> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(document(i));
  return out;
}

double IndexHandle::average_tokens() const noexcept {
  return static_cast<double>(tokens_.size() / dim()) / static_cast<double>(size());
}

IndexHandle build_index(std::span<const MultiVector> docs, Precision precision, bool normalize,
                        const std::filesystem::path& path) {
  auto handle = IndexHandle::build(docs, precision, normalize);
  handle.save(path);
  return IndexHandle::load(path);
}

std::vector<MultiVector> load_multivectors(const std::filesystem::path& path) {
  return IndexHandle::load(path).documents();
}

}  // namespace colmax::store

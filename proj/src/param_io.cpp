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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "colmax/training_math.hpp"
#include "json.hpp"

namespace colmax::training {

void save_params(const ParamSet& params, const std::filesystem::path& manifest) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  auto blob_path = manifest;
  blob_path.replace_extension(".bin");

  nlohmann::ordered_json j;
  j["format"] = "colmax-params";
  j["version"] = 1;
  j["dtype"] = "float32";
  j["byte_order"] = "little";
  j["blob"] = blob_path.filename().string();
  j["tensors"] = nlohmann::ordered_json::array();

  std::vector<float> blob;
  for (const auto& [name, t] : params) {
    j["tensors"].push_back({{"name", name},
                            {"shape", t.shape},
                            {"offset", blob.size()},
                            {"count", t.values.size()}});
    for (double v : t.values) blob.push_back(static_cast<float>(v));
  }

  std::ofstream bin(blob_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw Error(ErrorCode::IoFailure, "cannot create " + blob_path.string());
  bin.write(reinterpret_cast<const char*>(blob.data()),
            static_cast<std::streamsize>(blob.size() * sizeof(float)));
  std::ofstream man(manifest, std::ios::trunc);
  if (!man) throw Error(ErrorCode::IoFailure, "cannot create " + manifest.string());
  man << j.dump(2) << '\n';
  if (!bin || !man) throw Error(ErrorCode::IoFailure, "write failed: " + manifest.string());
}

ParamSet load_params(const std::filesystem::path& manifest) {
  std::ifstream man(manifest);
  if (!man) throw Error(ErrorCode::IoFailure, "cannot open " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(man);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, manifest.string() + ": " + e.what());
  }
  if (j.value("dtype", "") != "float32") {
    throw Error(ErrorCode::FormatError, manifest.string() + ": only float32 blobs are supported");
  }

  const auto blob_path = manifest.parent_path() / j.value("blob", "");
  std::ifstream bin(blob_path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::IoFailure, "cannot open " + blob_path.string());
  const std::vector<char> raw((std::istreambuf_iterator<char>(bin)),
                              std::istreambuf_iterator<char>());
  if (raw.size() % sizeof(float) != 0) {
    throw Error(ErrorCode::FormatError, blob_path.string() + ": size is not a multiple of 4");
  }
  std::vector<float> blob(raw.size() / sizeof(float));
  std::memcpy(blob.data(), raw.data(), raw.size());

  ParamSet out;
  try {
    for (const auto& entry : j.at("tensors")) {
      Tensor t;
      const auto name = entry.at("name").get<std::string>();
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto count = entry.at("count").get<std::size_t>();
      if (count != t.element_count() || offset > blob.size() || count > blob.size() - offset) {
        throw Error(ErrorCode::FormatError, manifest.string() + ": tensor '" + name +
                                                "' does not fit its shape or the blob");
      }
      t.values.assign(blob.begin() + static_cast<long>(offset),
                      blob.begin() + static_cast<long>(offset + count));
      if (!out.emplace(name, std::move(t)).second) {
        throw Error(ErrorCode::FormatError, manifest.string() + ": duplicate tensor '" + name + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, manifest.string() + ": " + e.what());
  }
  return out;
}

}  // namespace colmax::training

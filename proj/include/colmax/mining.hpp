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

/// \file mining.hpp
/// Positive-aware hard-negative mining: keep the k most similar candidates
/// whose teacher similarity stays strictly below `threshold` times the
/// positive's similarity, which screens out likely false negatives.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::curation {

inline constexpr double kDefaultMiningThreshold = 0.95;

struct TrainingTriplet {
  std::string query_id;
  std::string positive_id;
  std::vector<std::string> negative_ids;        // descending similarity
  std::map<std::string, double> teacher_scores; // positive and every negative

  friend bool operator==(const TrainingTriplet&, const TrainingTriplet&) = default;
};

/// `candidates` maps doc id to teacher similarity and must contain the
/// positive. Fewer than k negatives come back when the filtered pool is
/// small; an empty list is not an error.
/// Errors: MissingPositiveScore, NonPositiveK, InvalidArgument (threshold
/// outside (0, 1]), NonFiniteValue.
TrainingTriplet mine_hard_negatives(const std::string& query_id, const std::string& positive_id,
                                    const std::map<std::string, double>& candidates,
                                    std::int64_t k, double threshold = kDefaultMiningThreshold);

/// One JSON object per line: {"query_id", "positive_id", "negative_ids", "scores"}.
std::string to_json_line(const TrainingTriplet& t);
TrainingTriplet triplet_from_json_line(const std::string& line);
void write_triplets(const std::vector<TrainingTriplet>& triplets,
                    const std::filesystem::path& path);
std::vector<TrainingTriplet> read_triplets(const std::filesystem::path& path);

/// Query-side augmentation hook (translation and the like). Each call may
/// return any number of derived queries; nothing ships behind it.
using QueryTransform = std::function<std::vector<MultiVector>(const MultiVector&)>;

/// Originals followed, per query, by whatever `transform` derives from it.
std::vector<MultiVector> expand_queries(const std::vector<MultiVector>& queries,
                                        const QueryTransform& transform);

}  // namespace colmax::curation

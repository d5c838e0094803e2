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

#include "colmax/mining.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace colmax::curation {

TrainingTriplet mine_hard_negatives(const std::string& query_id, const std::string& positive_id,
                                    const std::map<std::string, double>& candidates,
                                    std::int64_t k, double threshold) {
  if (k <= 0) throw Error(ErrorCode::NonPositiveK, "k must be positive, got " + std::to_string(k));
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "threshold must be in (0, 1]");
  }
  const auto pos = candidates.find(positive_id);
  if (pos == candidates.end()) {
    throw Error(ErrorCode::MissingPositiveScore,
                "no teacher score for positive '" + positive_id + "' of query '" + query_id + "'");
  }
  for (const auto& [id, sim] : candidates) {
    if (!std::isfinite(sim)) {
      throw Error(ErrorCode::NonFiniteValue, "teacher score of '" + id + "' is not finite");
    }
  }

  const double cutoff = threshold * pos->second;
  std::vector<std::pair<std::string, double>> pool;
  for (const auto& [id, sim] : candidates) {
    if (id != positive_id && sim < cutoff) pool.emplace_back(id, sim);
  }
  // std::map iteration already orders ids ascending, so a stable sort on
  // score alone gives the id tie-break.
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (pool.size() > static_cast<std::size_t>(k)) pool.resize(static_cast<std::size_t>(k));

  TrainingTriplet t{query_id, positive_id, {}, {{positive_id, pos->second}}};
  for (auto& [id, sim] : pool) {
    t.teacher_scores.emplace(id, sim);
    t.negative_ids.push_back(std::move(id));
  }
  return t;
}

std::string to_json_line(const TrainingTriplet& t) {
  nlohmann::ordered_json j;
  j["query_id"] = t.query_id;
  j["positive_id"] = t.positive_id;
  j["negative_ids"] = t.negative_ids;
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  for (const auto& [id, s] : t.teacher_scores) scores[id] = s;
  j["scores"] = scores;
  return j.dump();
}

TrainingTriplet triplet_from_json_line(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    TrainingTriplet t;
    t.query_id = j.at("query_id").get<std::string>();
    t.positive_id = j.at("positive_id").get<std::string>();
    t.negative_ids = j.at("negative_ids").get<std::vector<std::string>>();
    t.teacher_scores = j.at("scores").get<std::map<std::string, double>>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad triplet line: ") + e.what());
  }
}

void write_triplets(const std::vector<TrainingTriplet>& triplets,
                    const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  for (const auto& t : triplets) out << to_json_line(t) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<TrainingTriplet> read_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<TrainingTriplet> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(triplet_from_json_line(line));
  }
  return out;
}

std::vector<MultiVector> expand_queries(const std::vector<MultiVector>& queries,
                                        const QueryTransform& transform) {
  std::vector<MultiVector> out = queries;
  if (!transform) return out;
  for (const auto& q : queries) {
    for (auto& derived : transform(q)) out.push_back(std::move(derived));
  }
  return out;
}

}  // namespace colmax::curation

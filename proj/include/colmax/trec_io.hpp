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

/// \file trec_io.hpp
/// TREC text formats.
///   qrels: "query_id 0 doc_id rel"
///   run:   "query_id Q0 doc_id rank score tag"

#include <filesystem>
#include <iosfwd>
#include <string>

#include "colmax/metrics.hpp"

namespace colmax::eval {

Qrels parse_qrels(std::istream& in);
Qrels read_qrels(const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, std::ostream& out);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

/// Lines for a query are re-ordered by descending score, ties by doc id.
RunResult parse_run(std::istream& in);
RunResult read_run(const std::filesystem::path& path);
void write_run(const RunResult& run, std::ostream& out, const std::string& tag = "colmax");
void write_run(const RunResult& run, const std::filesystem::path& path,
               const std::string& tag = "colmax");

}  // namespace colmax::eval

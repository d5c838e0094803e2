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

/// \file synthetic.hpp
/// Planted-relevance benchmark generator.
///
/// Token embeddings live near a random `latent_rank`-dimensional subspace of
/// the ambient space. Every document belongs to one of `topics` mixture
/// clusters and draws its tokens from that topic's pool of atoms, each token
/// jittered so it is specific to its document. A query copies a random subset
/// of its positive document's tokens and perturbs them by `query_noise`.
/// Documents of the same topic have nearly identical mean vectors, so a
/// pooled single-vector ranker sees the topic but not the document, while
/// MaxSim can match individual tokens.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "colmax/core_model.hpp"
#include "colmax/metrics.hpp"

namespace colmax::eval {

struct TokenCountDistribution {
  double mean = 50.0;
  double stddev = 10.0;
  std::size_t min = 8;
  std::size_t max = 128;
};

struct PlantedStructure {
  std::size_t latent_rank = 12;
  std::size_t topics = 32;
  std::size_t atoms_per_topic = 48;
  double topic_weight = 1.0;         // pull of atoms toward their topic centre
  double doc_jitter = 0.35;          // per-token latent jitter making tokens doc-specific
  double ambient_noise = 0.02;       // isotropic noise outside the subspace
  std::size_t query_tokens = 16;
  double query_noise = 0.15;         // latent perturbation of copied tokens
  double near_duplicate_rate = 0.25; // queries that also get a grade-1 near copy
  double near_duplicate_jitter = 0.15;
};

struct BenchmarkConfig {
  std::uint64_t seed = 7;
  std::size_t n_docs = 10000;
  std::size_t n_queries = 100;
  std::size_t dim = 64;
  TokenCountDistribution tokens;
  PlantedStructure planted;
};

struct Benchmark {
  std::vector<MultiVector> corpus;
  std::vector<MultiVector> queries;
  Qrels qrels;  // positive: grade 2, near duplicate: grade 1
};

/// Deterministic per seed. Errors: InvalidArgument (n_docs < n_queries,
/// latent_rank > dim, zero sizes).
Benchmark generate_synthetic_benchmark(const BenchmarkConfig& config);

/// Writes corpus.cmx and queries.cmx (FP32 index files) and qrels.txt.
void write_benchmark(const Benchmark& bench, const std::filesystem::path& dir);
Benchmark read_benchmark(const std::filesystem::path& dir);

}  // namespace colmax::eval

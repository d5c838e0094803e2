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

/// \file clustering.hpp
/// Cluster-based sampling of a document corpus: PCA to a small dimension,
/// k-means (k-means++ seeding, Lloyd iterations, squared Euclidean), the
/// gap statistic for choosing k, then uniform sampling inside each cluster.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::curation {

inline constexpr std::size_t kClusteringDim = 50;

struct ClusterAssignment {
  std::string doc_id;
  std::size_t cluster = 0;

  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

struct KMeansOptions {
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  /// Independent restarts; the lowest final objective wins.
  std::size_t restarts = 1;
};

struct KMeansResult {
  std::vector<std::size_t> labels;   // one per point, in [0, k)
  std::vector<Vector> centroids;
  double inertia = 0.0;              // W_k: summed squared distance to own centroid
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective after every assignment step of the winning run.
  std::vector<double> inertia_trace;
};

/// Errors: NonPositiveK, KTooLarge, DimMismatch.
KMeansResult kmeans(std::span<const Vector> points, std::size_t k, const KMeansOptions& opts);

/// Summed squared distance of each point to its labelled centroid.
double within_dispersion(std::span<const Vector> points, std::span<const std::size_t> labels,
                         std::span<const Vector> centroids);

/// PCA to `target_dim` (default 50). Errors: InsufficientTargetReduction when
/// the source dim is not larger than the target, otherwise as fit_projection.
std::vector<Vector> reduce_for_clustering(std::span<const Vector> corpus,
                                          std::size_t target_dim = kClusteringDim);

struct GapPoint {
  std::size_t k = 0;
  double within_dispersion = 0.0;  // W_k on the data
  double gap = 0.0;
  double sd = 0.0;                 // s_k, already scaled by sqrt(1 + 1/B)
};

struct GapCurve {
  std::vector<GapPoint> points;    // k = 1 .. k_max
  std::size_t chosen_k = 0;
};

struct GapOptions {
  std::size_t k_max = 8;
  std::size_t reference_draws = 10;  // B
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  std::size_t restarts = 2;
};

/// References are drawn uniformly over the data's bounding box. chosen_k is
/// the smallest k with Gap(k) >= Gap(k+1) - s_{k+1}, or k_max if none.
/// Errors: InvalidArgument (k_max < 2, B < 5), DegenerateData, KTooLarge.
GapCurve gap_statistic_select_k(std::span<const Vector> points, const GapOptions& opts);

/// min(per_cluster_n, |cluster|) ids drawn without replacement from every
/// cluster, clusters in ascending order, members in input order.
std::vector<std::string> cluster_uniform_sample(std::span<const ClusterAssignment> assignments,
                                                std::size_t per_cluster_n, std::uint64_t seed);

/// CSV with a "doc_id,cluster" header.
void write_assignments(std::span<const ClusterAssignment> assignments,
                       const std::filesystem::path& path);
std::vector<ClusterAssignment> read_assignments(const std::filesystem::path& path);

}  // namespace colmax::curation

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

/// \file projection.hpp
/// Linear dimensionality reduction for token embeddings, fitted as the top
/// principal components of a mean-centred sample.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::store {

struct ProjectionMatrix {
  std::size_t rows = 0;             // target dim
  std::size_t cols = 0;             // source dim
  std::vector<double> entries;      // row-major rows x cols
  std::vector<double> mean;         // cols, subtracted before projecting
  std::string fitted_on;            // fingerprint of the fitting sample

  std::span<const double> row(std::size_t r) const { return {entries.data() + r * cols, cols}; }

  /// out = P (x - mean)
  void project(std::span<const float> x, std::span<double> out) const;
};

/// Top-`target_dim` principal axes of the row-major sample (n x dim).
/// Rows are orthonormal; each row's largest-magnitude entry is positive.
/// Errors: InsufficientSample (n <= target_dim),
/// InsufficientTargetReduction (target_dim >= dim or zero),
/// RankDeficient (fewer than target_dim non-negligible variances).
ProjectionMatrix fit_projection(std::span<const float> sample, std::size_t dim,
                                std::size_t target_dim);
ProjectionMatrix fit_projection(std::span<const Vector> sample, std::size_t target_dim);

/// Maps every token through P; L2-renormalises the result when asked.
MultiVector apply_projection(const MultiVector& mv, const ProjectionMatrix& p, bool renormalize);

/// Order-sensitive FNV-1a over the float bits, prefixed with the shape.
std::string sample_fingerprint(std::span<const float> sample, std::size_t dim);

void save_projection(const ProjectionMatrix& p, const std::filesystem::path& path);
ProjectionMatrix load_projection(const std::filesystem::path& path);

}  // namespace colmax::store

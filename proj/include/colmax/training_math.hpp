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

/// \file training_math.hpp
/// Reference implementations of the contrastive (InfoNCE) objective over
/// late-interaction similarities, its analytic gradient, and weighted
/// averaging of parameter sets ("model souping").

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "colmax/core_model.hpp"

namespace colmax::training {

struct LossInput {
  MultiVector query;
  MultiVector positive;
  std::vector<MultiVector> negatives;
  double tau = 1.0;
  SimilarityKind sim = SimilarityKind::DOT;
};

/// -log softmax of the positive among {positive} U negatives, each scored by
/// MaxSim at temperature tau; evaluated with a max-shifted log-sum-exp.
/// Zero exactly when there are no negatives.
/// Errors: InvalidArgument (tau <= 0), DimMismatch.
double info_nce_loss(const LossInput& input);

/// The same objective from precomputed similarities.
double info_nce_from_scores(double positive, const std::vector<double>& negatives, double tau);

/// Per-coordinate gradients, shaped like the inputs (token-major).
struct LossGradient {
  std::vector<double> query;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

/// Analytic gradient for sim = DOT. Each query token routes its gradient to
/// the document token that wins its MaxSim; ties go to the lowest index, and
/// document tokens that never win get exactly zero.
/// Errors: UnsupportedSimilarity for COSINE, plus those of info_nce_loss.
LossGradient info_nce_gradient(const LossInput& input);

/// A tensor of arbitrary shape; values kept row-major in double.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t element_count() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using ParamSet = std::map<std::string, Tensor>;

/// Members with non-negative weights, normalised to sum to one on
/// construction. Errors: InvalidArgument (length mismatch, empty, negative
/// or all-zero weights), NameSetMismatch, ShapeMismatch.
class MergeSpec {
 public:
  MergeSpec(std::vector<ParamSet> members, std::vector<double> weights);

  /// Equal weights.
  static MergeSpec uniform(std::vector<ParamSet> members);

  const std::vector<ParamSet>& members() const noexcept { return members_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<ParamSet> members_;
  std::vector<double> weights_;
};

/// output[name] = sum_i weights[i] * members[i][name], elementwise.
ParamSet merge_models(const MergeSpec& spec);

/// Parameter sets on disk: a JSON manifest listing every tensor's name,
/// shape and element offset, plus a raw little-endian float32 blob named in
/// the manifest and stored next to it.
void save_params(const ParamSet& params, const std::filesystem::path& manifest);
ParamSet load_params(const std::filesystem::path& manifest);

}  // namespace colmax::training

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

#include "colmax/training_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace colmax::training {
namespace {

double dot64(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double pair_sim(std::span<const float> a, std::span<const float> b, SimilarityKind sim) {
  const double d = dot64(a, b);
  if (sim == SimilarityKind::DOT) return d;
  const double na = std::sqrt(dot64(a, a));
  const double nb = std::sqrt(dot64(b, b));
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return d / (na * nb);
}

// MaxSim evaluated entirely in double so that finite differences of the loss
// resolve steps of 1e-4; `winners` receives the routing argmax per query token.
double maxsim64(const MultiVector& q, const MultiVector& d, SimilarityKind sim,
                std::vector<std::size_t>* winners) {
  if (winners) winners->assign(q.token_count(), 0);
  double total = 0.0;
  for (std::size_t a = 0; a < q.token_count(); ++a) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < d.token_count(); ++j) {
      const double s = pair_sim(q.token(a), d.token(j), sim);
      if (s > best) {
        best = s;
        arg = j;
      }
    }
    if (winners) (*winners)[a] = arg;
    total += best;
  }
  return total;
}

void check_input(const LossInput& in) {
  if (!(in.tau > 0.0) || !std::isfinite(in.tau)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  }
  require_valid(in.query);
  require_valid(in.positive);
  if (in.positive.dim() != in.query.dim()) {
    throw Error(ErrorCode::DimMismatch, "positive dim differs from query dim");
  }
  for (const auto& n : in.negatives) {
    require_valid(n);
    if (n.dim() != in.query.dim()) {
      throw Error(ErrorCode::DimMismatch, "negative '" + n.id() + "' dim differs from query dim");
    }
  }
}

// softmax(scores / tau) with the max subtracted first.
std::vector<double> softmax(const std::vector<double>& scores, double tau, double* log_norm) {
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s / tau);
  double z = 0.0;
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] / tau - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  if (log_norm) *log_norm = m + std::log(z);
  return p;
}

}  // namespace

double info_nce_from_scores(double positive, const std::vector<double>& negatives, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  std::vector<double> scores;
  scores.reserve(negatives.size() + 1);
  scores.push_back(positive);
  scores.insert(scores.end(), negatives.begin(), negatives.end());
  double log_norm = 0.0;
  softmax(scores, tau, &log_norm);
  return log_norm - positive / tau;
}

double info_nce_loss(const LossInput& input) {
  check_input(input);
  const double pos = maxsim64(input.query, input.positive, input.sim, nullptr);
  std::vector<double> negs;
  negs.reserve(input.negatives.size());
  for (const auto& n : input.negatives) negs.push_back(maxsim64(input.query, n, input.sim, nullptr));
  return info_nce_from_scores(pos, negs, input.tau);
}

LossGradient info_nce_gradient(const LossInput& input) {
  check_input(input);
  if (input.sim != SimilarityKind::DOT) {
    throw Error(ErrorCode::UnsupportedSimilarity, "analytic gradient is implemented for DOT only");
  }
  const std::size_t dim = input.query.dim();
  std::vector<const MultiVector*> docs{&input.positive};
  for (const auto& n : input.negatives) docs.push_back(&n);

  std::vector<double> scores(docs.size());
  std::vector<std::vector<std::size_t>> winners(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    scores[i] = maxsim64(input.query, *docs[i], SimilarityKind::DOT, &winners[i]);
  }
  const auto p = softmax(scores, input.tau, nullptr);

  LossGradient g;
  g.query.assign(input.query.data().size(), 0.0);
  std::vector<std::vector<double>> doc_grads(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    doc_grads[i].assign(docs[i]->data().size(), 0.0);
    const double coeff = (p[i] - (i == 0 ? 1.0 : 0.0)) / input.tau;
    for (std::size_t a = 0; a < input.query.token_count(); ++a) {
      const std::size_t j = winners[i][a];
      const auto q = input.query.token(a);
      const auto d = docs[i]->token(j);
      for (std::size_t c = 0; c < dim; ++c) {
        g.query[a * dim + c] += coeff * d[c];
        doc_grads[i][j * dim + c] += coeff * q[c];
      }
    }
  }
  g.positive = std::move(doc_grads[0]);
  for (std::size_t i = 1; i < doc_grads.size(); ++i) g.negatives.push_back(std::move(doc_grads[i]));
  return g;
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

MergeSpec::MergeSpec(std::vector<ParamSet> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
  if (members_.empty()) throw Error(ErrorCode::InvalidArgument, "merge needs at least one member");
  if (members_.size() != weights_.size()) {
    throw Error(ErrorCode::InvalidArgument, std::to_string(members_.size()) + " members but " +
                                                std::to_string(weights_.size()) + " weights");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "merge weights must be finite and non-negative");
    }
    total += w;
  }
  if (total == 0.0) throw Error(ErrorCode::InvalidArgument, "merge weights sum to zero");
  for (double& w : weights_) w /= total;

  const ParamSet& first = members_.front();
  for (std::size_t m = 1; m < members_.size(); ++m) {
    const ParamSet& other = members_[m];
    if (other.size() != first.size() ||
        !std::equal(first.begin(), first.end(), other.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw Error(ErrorCode::NameSetMismatch,
                  "member " + std::to_string(m) + " has a different parameter name set");
    }
    for (const auto& [name, t] : other) {
      const Tensor& ref = first.at(name);
      if (t.shape != ref.shape || t.values.size() != ref.values.size()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "parameter '" + name + "' of member " + std::to_string(m) + " differs in shape");
      }
    }
  }
  for (const auto& [name, t] : first) {
    if (t.values.size() != t.element_count()) {
      throw Error(ErrorCode::ShapeMismatch, "parameter '" + name + "' value count disagrees with shape");
    }
  }
}

MergeSpec MergeSpec::uniform(std::vector<ParamSet> members) {
  std::vector<double> w(members.size(), 1.0);
  return MergeSpec(std::move(members), std::move(w));
}

ParamSet merge_models(const MergeSpec& spec) {
  ParamSet out;
  const auto& members = spec.members();
  const auto& weights = spec.weights();
  for (const auto& [name, ref] : members.front()) {
    Tensor merged{ref.shape, std::vector<double>(ref.values.size(), 0.0)};
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto& values = members[m].at(name).values;
      for (std::size_t i = 0; i < values.size(); ++i) merged.values[i] += weights[m] * values[i];
    }
    out.emplace(name, std::move(merged));
  }
  return out;
}

}  // namespace colmax::training

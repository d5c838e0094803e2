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

#include "colmax/projection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace colmax::store {

void ProjectionMatrix::project(std::span<const float> x, std::span<double> out) const {
  if (x.size() != cols || out.size() != rows) {
    throw Error(ErrorCode::DimMismatch, "projection expects dim " + std::to_string(cols) +
                                            ", got " + std::to_string(x.size()));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* w = entries.data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * (static_cast<double>(x[c]) - mean[c]);
    out[r] = acc;
  }
}

std::string sample_fingerprint(std::span<const float> sample, std::size_t dim) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(sample.size() / std::max<std::size_t>(dim, 1));
  mix(dim);
  for (float x : sample) mix(std::bit_cast<std::uint32_t>(x));
  char buf[24];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ProjectionMatrix fit_projection(std::span<const float> sample, std::size_t dim,
                                std::size_t target_dim) {
  if (dim == 0 || sample.size() % dim != 0) {
    throw Error(ErrorCode::DimMismatch, "sample buffer is not a multiple of dim");
  }
  if (target_dim == 0 || target_dim >= dim) {
    throw Error(ErrorCode::InsufficientTargetReduction,
                "target dim " + std::to_string(target_dim) + " must be in [1, " +
                    std::to_string(dim) + ")");
  }
  const std::size_t n = sample.size() / dim;
  if (n <= target_dim) {
    throw Error(ErrorCode::InsufficientSample, "need more than " + std::to_string(target_dim) +
                                                   " sample vectors, got " + std::to_string(n));
  }

  const long d = static_cast<long>(dim);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (long c = 0; c < d; ++c) mean[c] += sample[i * dim + c];
  }
  mean /= static_cast<double>(n);

  // Scatter matrix accumulated in row blocks to bound memory.
  constexpr std::size_t kBlock = 2048;
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd block;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t rows = std::min(kBlock, n - start);
    block.resize(static_cast<long>(rows), d);
    for (std::size_t i = 0; i < rows; ++i) {
      for (long c = 0; c < d; ++c) {
        block(static_cast<long>(i), c) = sample[(start + i) * dim + c] - mean[c];
      }
    }
    scatter.noalias() += block.transpose() * block;
  }
  scatter /= static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scatter);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::RankDeficient, "eigendecomposition did not converge");
  }
  // Eigenvalues ascend; the top target_dim live at the end.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = std::max(values[d - 1], 0.0);
  const double tol = std::max(top, 1e-300) * 1e-10;
  std::size_t informative = 0;
  for (long i = 0; i < d; ++i) informative += values[i] > tol ? 1 : 0;
  if (top == 0.0 || informative < target_dim) {
    throw Error(ErrorCode::RankDeficient, "sample spans " + std::to_string(informative) +
                                              " directions, need " +
                                              std::to_string(target_dim));
  }

  ProjectionMatrix p;
  p.rows = target_dim;
  p.cols = dim;
  p.entries.resize(target_dim * dim);
  p.mean.assign(mean.data(), mean.data() + d);
  p.fitted_on = sample_fingerprint(sample, dim);
  for (std::size_t r = 0; r < target_dim; ++r) {
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - static_cast<long>(r));
    axis.normalize();
    long arg = 0;
    for (long c = 1; c < d; ++c) {
      if (std::fabs(axis[c]) > std::fabs(axis[arg])) arg = c;
    }
    if (axis[arg] < 0) axis = -axis;
    std::copy(axis.data(), axis.data() + d, p.entries.begin() + static_cast<long>(r * dim));
  }
  return p;
}

ProjectionMatrix fit_projection(std::span<const Vector> sample, std::size_t target_dim) {
  if (sample.empty()) throw Error(ErrorCode::InsufficientSample, "empty sample");
  const std::size_t dim = sample.front().size();
  std::vector<float> flat;
  flat.reserve(sample.size() * dim);
  for (const auto& v : sample) {
    if (v.size() != dim) throw Error(ErrorCode::DimMismatch, "sample vectors differ in dim");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return fit_projection(flat, dim, target_dim);
}

MultiVector apply_projection(const MultiVector& mv, const ProjectionMatrix& p,
                             bool renormalize) {
  if (mv.dim() != p.cols) {
    throw Error(ErrorCode::DimMismatch, "'" + mv.id() + "' has dim " + std::to_string(mv.dim()) +
                                            ", projection expects " + std::to_string(p.cols));
  }
  std::vector<double> tmp(p.rows);
  std::vector<float> out(mv.token_count() * p.rows);
  for (std::size_t t = 0; t < mv.token_count(); ++t) {
    p.project(mv.token(t), tmp);
    std::span<float> dst(out.data() + t * p.rows, p.rows);
    std::transform(tmp.begin(), tmp.end(), dst.begin(),
                   [](double v) { return static_cast<float>(v); });
    if (renormalize) normalize(dst);
  }
  return MultiVector(mv.id(), p.rows, std::move(out));
}

void save_projection(const ProjectionMatrix& p, const std::filesystem::path& path) {
  nlohmann::json j;
  j["rows"] = p.rows;
  j["cols"] = p.cols;
  j["fitted_on"] = p.fitted_on;
  j["mean"] = p.mean;
  j["entries"] = p.entries;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out << j.dump() << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

ProjectionMatrix load_projection(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  ProjectionMatrix p;
  try {
    const auto j = nlohmann::json::parse(in);
    p.rows = j.at("rows").get<std::size_t>();
    p.cols = j.at("cols").get<std::size_t>();
    p.fitted_on = j.at("fitted_on").get<std::string>();
    p.mean = j.at("mean").get<std::vector<double>>();
    p.entries = j.at("entries").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  if (p.mean.size() != p.cols || p.entries.size() != p.rows * p.cols || p.rows == 0) {
    throw Error(ErrorCode::FormatError, path.string() + ": projection shape is inconsistent");
  }
  return p;
}

}  // namespace colmax::store

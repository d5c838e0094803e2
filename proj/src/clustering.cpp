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

#include "colmax/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "colmax/projection.hpp"
#include "colmax/rng.hpp"

namespace colmax::curation {
namespace {

// Row-major double copy of the input points.
struct Points {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  const double* row(std::size_t i) const { return data.data() + i * dim; }
};

Points flatten(std::span<const Vector> points) {
  Points p;
  p.n = points.size();
  p.dim = points.empty() ? 0 : points.front().size();
  p.data.reserve(p.n * p.dim);
  for (const auto& v : points) {
    if (v.size() != p.dim) throw Error(ErrorCode::DimMismatch, "points differ in dim");
    p.data.insert(p.data.end(), v.begin(), v.end());
  }
  return p;
}

double sq_dist(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t c = 0; c < dim; ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

struct Run {
  std::vector<std::size_t> labels;
  std::vector<double> centroids;  // k x dim
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

std::vector<double> plus_plus_seeds(const Points& p, std::size_t k, Rng& rng) {
  std::vector<double> centroids;
  centroids.reserve(k * p.dim);
  std::vector<bool> chosen(p.n, false);
  auto take = [&](std::size_t i) {
    chosen[i] = true;
    centroids.insert(centroids.end(), p.row(i), p.row(i) + p.dim);
  };
  take(std::uniform_int_distribution<std::size_t>(0, p.n - 1)(rng));

  std::vector<double> d2(p.n);
  for (std::size_t i = 0; i < p.n; ++i) d2[i] = sq_dist(p.row(i), centroids.data(), p.dim);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) total += chosen[i] ? 0.0 : d2[i];
    std::size_t pick = p.n;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double cum = 0.0;
      for (std::size_t i = 0; i < p.n; ++i) {
        if (chosen[i] || d2[i] == 0.0) continue;
        cum += d2[i];
        pick = i;
        if (cum > r) break;
      }
    } else {
      // Every remaining point coincides with a centre already taken.
      for (std::size_t i = 0; i < p.n && pick == p.n; ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    take(pick);
    const double* centre = centroids.data() + c * p.dim;
    for (std::size_t i = 0; i < p.n; ++i) d2[i] = std::min(d2[i], sq_dist(p.row(i), centre, p.dim));
  }
  return centroids;
}

double objective(const Points& p, const std::vector<std::size_t>& labels,
                 const std::vector<double>& centroids) {
  double w = 0.0;
  for (std::size_t i = 0; i < p.n; ++i) {
    w += sq_dist(p.row(i), centroids.data() + labels[i] * p.dim, p.dim);
  }
  return w;
}

Run lloyd(const Points& p, std::size_t k, std::size_t max_iters, Rng& rng) {
  Run run;
  run.centroids = plus_plus_seeds(p, k, rng);
  run.labels.assign(p.n, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> counts(k);

  for (std::size_t it = 0; it < std::max<std::size_t>(max_iters, 1); ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < p.n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(p.row(i), run.centroids.data() + c * p.dim, p.dim);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    run.trace.push_back(objective(p, run.labels, run.centroids));
    run.iterations = it + 1;
    if (!changed) {
      run.converged = true;
      break;
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t l : run.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      // Re-seed from the point farthest from its centre, taken from a
      // cluster that can spare it.
      std::size_t far = p.n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < p.n; ++i) {
        if (counts[run.labels[i]] < 2) continue;
        const double d = sq_dist(p.row(i), run.centroids.data() + run.labels[i] * p.dim, p.dim);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[run.labels[far]];
      run.labels[far] = c;
      counts[c] = 1;
    }
    std::fill(run.centroids.begin(), run.centroids.end(), 0.0);
    for (std::size_t i = 0; i < p.n; ++i) {
      double* centre = run.centroids.data() + run.labels[i] * p.dim;
      const double* x = p.row(i);
      for (std::size_t d = 0; d < p.dim; ++d) centre[d] += x[d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < p.dim; ++d) {
        run.centroids[c * p.dim + d] /= static_cast<double>(counts[c]);
      }
    }
  }
  run.inertia = objective(p, run.labels, run.centroids);
  return run;
}

Run best_of(const Points& p, std::size_t k, const KMeansOptions& opts) {
  if (k == 0) throw Error(ErrorCode::NonPositiveK, "k must be at least 1");
  if (k > p.n) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " exceeds " +
                                          std::to_string(p.n) + " points");
  }
  Run best;
  for (std::size_t r = 0; r < std::max<std::size_t>(opts.restarts, 1); ++r) {
    Rng rng = make_rng(opts.seed, r);
    Run run = lloyd(p, k, opts.max_iters, rng);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

double safe_log(double w) { return std::log(std::max(w, std::numeric_limits<double>::min())); }

}  // namespace

KMeansResult kmeans(std::span<const Vector> points, std::size_t k, const KMeansOptions& opts) {
  const Points p = flatten(points);
  Run run = best_of(p, k, opts);
  KMeansResult out;
  out.labels = std::move(run.labels);
  out.inertia = run.inertia;
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.inertia_trace = std::move(run.trace);
  for (std::size_t c = 0; c < k; ++c) {
    const double* centre = run.centroids.data() + c * p.dim;
    out.centroids.emplace_back(centre, centre + p.dim);
  }
  return out;
}

double within_dispersion(std::span<const Vector> points, std::span<const std::size_t> labels,
                         std::span<const Vector> centroids) {
  double w = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    const auto& c = centroids[labels[i]];
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = static_cast<double>(x[d]) - c[d];
      w += diff * diff;
    }
  }
  return w;
}

std::vector<Vector> reduce_for_clustering(std::span<const Vector> corpus, std::size_t target_dim) {
  if (corpus.empty()) throw Error(ErrorCode::InsufficientSample, "empty corpus");
  const std::size_t dim = corpus.front().size();
  if (dim <= target_dim) {
    throw Error(ErrorCode::InsufficientTargetReduction,
                "corpus dim " + std::to_string(dim) + " is not above the target " +
                    std::to_string(target_dim));
  }
  const auto proj = store::fit_projection(corpus, target_dim);
  std::vector<Vector> out;
  out.reserve(corpus.size());
  std::vector<double> tmp(target_dim);
  for (const auto& v : corpus) {
    proj.project(v, tmp);
    out.emplace_back(tmp.begin(), tmp.end());
  }
  return out;
}

GapCurve gap_statistic_select_k(std::span<const Vector> points, const GapOptions& opts) {
  if (opts.k_max < 2) throw Error(ErrorCode::InvalidArgument, "k_max must be at least 2");
  if (opts.reference_draws < 5) {
    throw Error(ErrorCode::InvalidArgument, "need at least 5 reference draws");
  }
  const Points data = flatten(points);
  if (data.n == 0) throw Error(ErrorCode::DegenerateData, "no points");
  std::vector<double> lo(data.row(0), data.row(0) + data.dim);
  std::vector<double> hi = lo;
  for (std::size_t i = 1; i < data.n; ++i) {
    for (std::size_t d = 0; d < data.dim; ++d) {
      lo[d] = std::min(lo[d], data.row(i)[d]);
      hi[d] = std::max(hi[d], data.row(i)[d]);
    }
  }
  if (lo == hi) throw Error(ErrorCode::DegenerateData, "all points are identical");

  const std::size_t kmax = opts.k_max;
  const std::size_t draws = opts.reference_draws;
  auto options_for = [&](std::uint64_t stream) {
    return KMeansOptions{derive_seed(opts.seed, stream), opts.max_iters, opts.restarts};
  };

  GapCurve curve;
  std::vector<double> log_w(kmax + 1);
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double w = best_of(data, k, options_for(k)).inertia;
    log_w[k] = safe_log(w);
    curve.points.push_back({k, w, 0.0, 0.0});
  }

  // ref_log[b][k]
  std::vector<std::vector<double>> ref_log(draws, std::vector<double>(kmax + 1));
  Points ref{data.n, data.dim, std::vector<double>(data.data.size())};
  for (std::size_t b = 0; b < draws; ++b) {
    Rng rng = make_rng(opts.seed, 100000 + b);
    for (std::size_t i = 0; i < ref.n; ++i) {
      for (std::size_t d = 0; d < ref.dim; ++d) {
        ref.data[i * ref.dim + d] = std::uniform_real_distribution<double>(lo[d], hi[d])(rng);
      }
    }
    for (std::size_t k = 1; k <= kmax; ++k) {
      ref_log[b][k] = safe_log(best_of(ref, k, options_for(1000 * (b + 1) + k)).inertia);
    }
  }

  const double bd = static_cast<double>(draws);
  for (std::size_t k = 1; k <= kmax; ++k) {
    double mean = 0.0;
    for (std::size_t b = 0; b < draws; ++b) mean += ref_log[b][k];
    mean /= bd;
    double var = 0.0;
    for (std::size_t b = 0; b < draws; ++b) var += (ref_log[b][k] - mean) * (ref_log[b][k] - mean);
    var /= bd;
    curve.points[k - 1].gap = mean - log_w[k];
    curve.points[k - 1].sd = std::sqrt(var) * std::sqrt(1.0 + 1.0 / bd);
  }

  curve.chosen_k = kmax;
  for (std::size_t k = 1; k < kmax; ++k) {
    const auto& here = curve.points[k - 1];
    const auto& next = curve.points[k];
    if (here.gap >= next.gap - next.sd) {
      curve.chosen_k = k;
      break;
    }
  }
  return curve;
}

std::vector<std::string> cluster_uniform_sample(std::span<const ClusterAssignment> assignments,
                                                std::size_t per_cluster_n, std::uint64_t seed) {
  if (per_cluster_n == 0) throw Error(ErrorCode::InvalidArgument, "per_cluster_n must be >= 1");
  std::map<std::size_t, std::vector<std::string>> members;
  for (const auto& a : assignments) members[a.cluster].push_back(a.doc_id);

  std::vector<std::string> out;
  for (const auto& [cluster, ids] : members) {
    Rng rng = make_rng(seed, cluster);
    std::sample(ids.begin(), ids.end(), std::back_inserter(out),
                std::min(per_cluster_n, ids.size()), rng);
  }
  return out;
}

void write_assignments(std::span<const ClusterAssignment> assignments,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
  out << "doc_id,cluster\n";
  for (const auto& a : assignments) out << a.doc_id << ',' << a.cluster << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
}

std::vector<ClusterAssignment> read_assignments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "doc_id,cluster") {
    throw Error(ErrorCode::ParseError, path.string() + ": missing doc_id,cluster header");
  }
  std::vector<ClusterAssignment> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) +
                                             ": expected doc_id,cluster");
    }
    try {
      std::size_t used = 0;
      const std::string num = line.substr(comma + 1);
      const auto cluster = std::stoul(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing characters");
      out.push_back({line.substr(0, comma), cluster});
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) +
                                             ": bad cluster number");
    }
  }
  return out;
}

}  // namespace colmax::curation

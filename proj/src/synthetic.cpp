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

#include "colmax/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "colmax/index_file.hpp"
#include "colmax/rng.hpp"
#include "colmax/trec_io.hpp"

namespace colmax::eval {
namespace {

enum Stream : std::uint64_t {
  kBasis = 1,
  kTopics = 2,
  kPositives = 3,
  kDuplicates = 4,
  kDocBase = 1'000'000,
  kQueryBase = 2'000'000,
};

std::vector<double> gaussian(Rng& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng) * scale;
  return v;
}

void unit(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  if (s > 0.0) {
    for (double& x : v) x /= s;
  }
}

// dim x rank column-orthonormal basis, stored column-major.
std::vector<double> random_basis(std::size_t dim, std::size_t rank, Rng& rng) {
  std::vector<double> basis;
  basis.reserve(dim * rank);
  for (std::size_t c = 0; c < rank; ++c) {
    auto col = gaussian(rng, dim, 1.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < c; ++p) {
        const double* prev = basis.data() + p * dim;
        double proj = 0.0;
        for (std::size_t i = 0; i < dim; ++i) proj += col[i] * prev[i];
        for (std::size_t i = 0; i < dim; ++i) col[i] -= proj * prev[i];
      }
    }
    unit(col);
    basis.insert(basis.end(), col.begin(), col.end());
  }
  return basis;
}

class Embedder {
 public:
  Embedder(std::size_t dim, std::size_t rank, Rng& rng)
      : dim_(dim), rank_(rank), basis_(random_basis(dim, rank, rng)) {}

  // Unit ambient vector for a latent point plus isotropic ambient noise.
  std::vector<float> embed(const std::vector<double>& latent, double ambient_noise,
                           Rng& rng) const {
    auto x = gaussian(rng, dim_, ambient_noise / std::sqrt(static_cast<double>(dim_)));
    for (std::size_t r = 0; r < rank_; ++r) {
      const double* col = basis_.data() + r * dim_;
      for (std::size_t i = 0; i < dim_; ++i) x[i] += latent[r] * col[i];
    }
    unit(x);
    return {x.begin(), x.end()};
  }

  // normalize(token + noise * B g / sqrt(rank))
  std::vector<float> perturb(std::span<const float> token, double noise, Rng& rng) const {
    const auto g = gaussian(rng, rank_, noise / std::sqrt(static_cast<double>(rank_)));
    std::vector<double> x(token.begin(), token.end());
    for (std::size_t r = 0; r < rank_; ++r) {
      const double* col = basis_.data() + r * dim_;
      for (std::size_t i = 0; i < dim_; ++i) x[i] += g[r] * col[i];
    }
    unit(x);
    return {x.begin(), x.end()};
  }

 private:
  std::size_t dim_;
  std::size_t rank_;
  std::vector<double> basis_;
};

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%06zu", prefix, i);
  return buf;
}

}  // namespace

Benchmark generate_synthetic_benchmark(const BenchmarkConfig& cfg) {
  const auto& ps = cfg.planted;
  if (cfg.n_docs == 0 || cfg.n_queries == 0 || cfg.dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "benchmark sizes must be positive");
  }
  if (cfg.n_docs < cfg.n_queries) {
    throw Error(ErrorCode::InvalidArgument, "need at least as many documents as queries");
  }
  if (ps.latent_rank == 0 || ps.latent_rank > cfg.dim || ps.topics == 0 ||
      ps.atoms_per_topic == 0 || ps.query_tokens == 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid planted structure");
  }
  if (cfg.tokens.min == 0 || cfg.tokens.min > cfg.tokens.max) {
    throw Error(ErrorCode::InvalidArgument, "invalid token count range");
  }
  const std::size_t rank = ps.latent_rank;
  const double latent_scale = 1.0 / std::sqrt(static_cast<double>(rank));

  Rng basis_rng = make_rng(cfg.seed, kBasis);
  const Embedder embedder(cfg.dim, rank, basis_rng);

  Rng topic_rng = make_rng(cfg.seed, kTopics);
  std::vector<std::vector<std::vector<double>>> atoms(ps.topics);
  for (auto& pool : atoms) {
    auto centre = gaussian(topic_rng, rank, 1.0);
    unit(centre);
    for (std::size_t a = 0; a < ps.atoms_per_topic; ++a) {
      auto atom = gaussian(topic_rng, rank, latent_scale);
      for (std::size_t r = 0; r < rank; ++r) atom[r] += ps.topic_weight * centre[r];
      unit(atom);
      pool.push_back(std::move(atom));
    }
  }

  Benchmark bench;
  bench.corpus.reserve(cfg.n_docs);
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    Rng rng = make_rng(cfg.seed, kDocBase + i);
    const auto& pool = atoms[std::uniform_int_distribution<std::size_t>(0, ps.topics - 1)(rng)];
    const double drawn = std::round(std::normal_distribution<double>(cfg.tokens.mean,
                                                                     cfg.tokens.stddev)(rng));
    const std::size_t count = static_cast<std::size_t>(std::clamp(
        drawn, static_cast<double>(cfg.tokens.min), static_cast<double>(cfg.tokens.max)));
    MultiVector doc(make_id("doc", i), cfg.dim, {});
    for (std::size_t t = 0; t < count; ++t) {
      auto latent = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      const auto jitter = gaussian(rng, rank, ps.doc_jitter * latent_scale);
      for (std::size_t r = 0; r < rank; ++r) latent[r] += jitter[r];
      doc.push_token(embedder.embed(latent, ps.ambient_noise, rng));
    }
    bench.corpus.push_back(std::move(doc));
  }

  // Positives are distinct documents; near duplicates overwrite other slots.
  std::vector<std::size_t> order(cfg.n_docs);
  std::iota(order.begin(), order.end(), 0);
  Rng pos_rng = make_rng(cfg.seed, kPositives);
  std::shuffle(order.begin(), order.end(), pos_rng);
  const std::vector<std::size_t> positives(order.begin(), order.begin() + cfg.n_queries);
  std::size_t spare = cfg.n_queries;

  Rng dup_rng = make_rng(cfg.seed, kDuplicates);
  for (std::size_t q = 0; q < cfg.n_queries; ++q) {
    const MultiVector& pos = bench.corpus[positives[q]];
    const std::string qid = make_id("q", q);
    bench.qrels.add(qid, pos.id(), 2);

    const bool duplicate = std::bernoulli_distribution(ps.near_duplicate_rate)(dup_rng);
    if (duplicate && spare < cfg.n_docs) {
      const std::size_t slot = order[spare++];
      MultiVector copy(bench.corpus[slot].id(), cfg.dim, {});
      for (std::size_t t = 0; t < pos.token_count(); ++t) {
        copy.push_token(embedder.perturb(pos.token(t), ps.near_duplicate_jitter, dup_rng));
      }
      bench.corpus[slot] = std::move(copy);
      bench.qrels.add(qid, bench.corpus[slot].id(), 1);
    }

    Rng rng = make_rng(cfg.seed, kQueryBase + q);
    std::vector<std::size_t> picks(pos.token_count());
    std::iota(picks.begin(), picks.end(), 0);
    std::shuffle(picks.begin(), picks.end(), rng);
    MultiVector query(qid, cfg.dim, {});
    for (std::size_t t = 0; t < ps.query_tokens; ++t) {
      const auto source = pos.token(picks[t % picks.size()]);
      if (ps.query_noise == 0.0) {
        query.push_token(source);
      } else {
        query.push_token(embedder.perturb(source, ps.query_noise, rng));
      }
    }
    bench.queries.push_back(std::move(query));
  }
  return bench;
}

void write_benchmark(const Benchmark& bench, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  store::IndexHandle::build(bench.corpus, Precision::FP32, false).save(dir / "corpus.cmx");
  store::IndexHandle::build(bench.queries, Precision::FP32, false).save(dir / "queries.cmx");
  write_qrels(bench.qrels, dir / "qrels.txt");
}

Benchmark read_benchmark(const std::filesystem::path& dir) {
  return {store::load_multivectors(dir / "corpus.cmx"),
          store::load_multivectors(dir / "queries.cmx"), read_qrels(dir / "qrels.txt")};
}

}  // namespace colmax::eval

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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "colmax/ablation.hpp"
#include "colmax/clustering.hpp"
#include "colmax/index_file.hpp"
#include "colmax/maxsim.hpp"
#include "colmax/metrics.hpp"
#include "colmax/mining.hpp"
#include "colmax/projection.hpp"
#include "colmax/rng.hpp"
#include "colmax/storage.hpp"
#include "colmax/synthetic.hpp"
#include "colmax/training_math.hpp"
#include "colmax/trec_io.hpp"

namespace colmax::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::vector<std::string> kPrecisions{"fp32", "fp16", "int8", "binary"};

// Flags every subcommand shares.
struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out;
  std::string format = "text";
};

void add_common(CLI::App* sub, Common& c, const std::string& out_help, bool out_required,
                std::uint64_t default_seed = 0) {
  c.seed = default_seed;
  sub->add_option("--config", c.config, "key=value file; command-line flags take precedence");
  sub->add_option("--seed", c.seed, "master seed")->envname("COLMAX_SEED")->capture_default_str();
  sub->add_option("--workers", c.workers, "parallel workers (0 = all cores)")->capture_default_str();
  auto* out = sub->add_option("--out", c.out, out_help);
  if (out_required) out->required();
}

void add_format(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "output format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
}

CLI::Option* add_precision(CLI::App* sub, std::string& target, const std::string& help) {
  return sub->add_option("--precision", target, help)
      ->check(CLI::IsMember(kPrecisions, CLI::ignore_case))
      ->capture_default_str();
}

// ---------------------------------------------------------------------------
// Config file: flat "key = value" lines, '#' comments. Keys are long flag
// names without the leading dashes.

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": empty key");
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  const std::string negated = "--no-" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0 || a == negated;
  });
}

// Appends "--key=value" for every config entry the command line leaves unset.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  for (const auto& [key, value] : read_config(*path)) {
    if (key == "config") continue;
    if (!given_on_command_line(args, key)) args.push_back("--" + key + "=" + value);
  }
  return args;
}

// ---------------------------------------------------------------------------
// I/O helpers

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Collections are either CMX index files or JSON lines of
// {"id": "...", "tokens": [[...], ...]}.
std::vector<MultiVector> read_collection(const std::string& path) {
  if (!has_suffix(path, ".jsonl")) return store::load_multivectors(path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<MultiVector> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::string id;
    std::vector<Vector> tokens;
    try {
      const auto j = nlohmann::json::parse(line);
      id = j.at("id").get<std::string>();
      tokens = j.at("tokens").get<std::vector<Vector>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(MultiVector::from_tokens(std::move(id), tokens));
  }
  return out;
}

void with_output(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot create " + path);
  fn(f);
  if (!f) throw Error(ErrorCode::IoFailure, "write failed: " + path);
}

// Outputs are always new files: refuse to write over an input.
void guard_inputs(const std::string& output, const std::vector<std::string>& inputs) {
  if (output.empty() || output == "-") return;
  const auto target = fs::weakly_canonical(output);
  for (const auto& in : inputs) {
    if (!in.empty() && fs::weakly_canonical(in) == target) {
      throw Error(ErrorCode::InvalidArgument, "--out would overwrite input " + in);
    }
  }
}

std::string fixed(double v, int places) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

SearchOptions search_options(const Common& c, const std::string& sim) {
  SearchOptions so;
  so.sim = sim == "cosine" ? SimilarityKind::COSINE : SimilarityKind::DOT;
  so.workers = c.workers;
  return so;
}

bool want_normalized_queries(const std::string& mode, const store::IndexHandle& index) {
  if (mode == "auto") return index.normalized();
  return mode == "on";
}

// Copy of `built` carrying a different normalized flag; the payload is untouched.
store::IndexHandle with_normalized_flag(const store::IndexHandle& built, bool normalized) {
  store::IndexHeader h = built.header();
  h.normalized = normalized;
  return store::IndexHandle(h, built.records(),
                            std::vector<std::uint8_t>(built.payload().begin(), built.payload().end()));
}

// ---------------------------------------------------------------------------
// Subcommands. Each registers its flags and returns the action to run.

using Action = std::function<void(std::ostream& out, std::ostream& err)>;

struct BuildIndex {
  Common c;
  std::string input, precision = "fp32";
  bool normalize = true;

  Action attach(CLI::App* sub) {
    sub->add_option("--input", input, "corpus: .cmx index or .jsonl token lists")->required();
    add_precision(sub, precision, "storage precision");
    sub->add_flag("--normalize,!--no-normalize", normalize, "L2-normalise every token before encoding")
        ->capture_default_str();
    add_common(sub, c, "index file to write", true);
    return [this](std::ostream& out, std::ostream& err) {
      guard_inputs(c.out, {input});
      const auto docs = read_collection(input);
      err << "read " << docs.size() << " documents from " << input << "\n";
      const auto index = store::build_index(docs, parse_precision(precision), normalize, c.out);
      out << "indexed " << index.size() << " documents dim " << index.dim() << " precision "
          << precision_name(index.precision()) << " -> " << c.out << "\n";
    };
  }
};

struct Search {
  Common c;
  std::string index_path, queries_path, mode = "maxsim", sim = "dot", query_norm = "auto", tag = "colmax";
  std::size_t k = 10, first_stage_k = 50;

  Action attach(CLI::App* sub) {
    sub->add_option("--index", index_path, "index file")->required();
    sub->add_option("--queries", queries_path, "queries: .cmx or .jsonl")->required();
    sub->add_option("--k", k, "hits per query")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--mode", mode, "maxsim | pooled | rerank")
        ->check(CLI::IsMember({"maxsim", "pooled", "rerank"}))
        ->capture_default_str();
    sub->add_option("--first-stage-k", first_stage_k, "pooled candidates re-scored in rerank mode")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--sim", sim, "token similarity for maxsim mode")
        ->check(CLI::IsMember({"dot", "cosine"}))
        ->capture_default_str();
    sub->add_option("--normalize-queries", query_norm, "auto follows the index's normalized flag")
        ->check(CLI::IsMember({"auto", "on", "off"}))
        ->capture_default_str();
    sub->add_option("--tag", tag, "run tag column")->capture_default_str();
    add_common(sub, c, "TREC run file (stdout if omitted)", false);
    return [this](std::ostream& out, std::ostream& err) {
      guard_inputs(c.out, {index_path, queries_path});
      const auto index = store::IndexHandle::load(index_path);
      const auto queries = read_collection(queries_path);
      const bool norm = want_normalized_queries(query_norm, index);
      const auto so = search_options(c, sim);
      eval::RunResult run;
      for (const auto& raw : queries) {
        const MultiVector q = norm ? normalized(raw) : raw;
        if (mode == "maxsim") run.add(search(q, index, k, so));
        else if (mode == "pooled") run.add(pooled_search(q, index, k, so));
        else run.add(retrieve_then_rerank(q, index, std::max(first_stage_k, k), k, so));
      }
      with_output(c.out, out, [&](std::ostream& o) { eval::write_run(run, o, tag); });
      err << "searched " << queries.size() << " queries against " << index.size() << " documents ("
          << mode << ")\n";
    };
  }
};

struct Evaluate {
  Common c;
  std::string run_path, qrels_path;
  std::size_t k = 10;
  bool per_query = false;

  Action attach(CLI::App* sub) {
    sub->add_option("--run", run_path, "TREC run file")->required();
    sub->add_option("--qrels", qrels_path, "TREC qrels file")->required();
    sub->add_option("--k", k, "NDCG cutoff")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--per-query", per_query, "also print one line per judged query");
    add_format(sub, c);
    add_common(sub, c, "write the report here instead of stdout", false);
    return [this](std::ostream& out, std::ostream&) {
      const auto report = eval::ndcg_at_k(eval::read_run(run_path), eval::read_qrels(qrels_path), k);
      const std::string metric = "ndcg@" + std::to_string(k);
      with_output(c.out, out, [&](std::ostream& o) {
        if (c.format == "json") {
          ordered_json j;
          j["metric"] = metric;
          j["mean"] = report.mean;
          j["queries"] = report.per_query.size();
          if (per_query) j["per_query"] = report.per_query;
          o << j.dump() << "\n";
          return;
        }
        if (per_query) {
          for (const auto& [qid, v] : report.per_query) o << qid << " " << metric << " " << fixed(v, 4) << "\n";
        }
        o << metric << " " << fixed(report.mean, 4) << "\n";
      });
    };
  }
};

struct EstimateStorage {
  Common c;
  std::uint64_t docs = 0;
  double avg_tokens = 0.0;
  std::uint32_t dim = 0;
  std::string precision = "fp16";

  Action attach(CLI::App* sub) {
    sub->add_option("--docs", docs, "number of pages")->required();
    sub->add_option("--avg-tokens", avg_tokens, "average token vectors per page")->required();
    sub->add_option("--dim", dim, "embedding dimension")->required();
    add_precision(sub, precision, "element precision");
    add_format(sub, c);
    add_common(sub, c, "write the estimate here instead of stdout", false);
    return [this](std::ostream& out, std::ostream&) {
      const auto e = store::estimate_storage(docs, avg_tokens, dim, parse_precision(precision));
      with_output(c.out, out, [&](std::ostream& o) {
        if (c.format == "json") {
          ordered_json j;
          j["n_docs"] = e.n_docs;
          j["avg_tokens"] = e.avg_tokens;
          j["dim"] = e.dim;
          j["precision"] = precision_name(e.precision);
          j["floats_per_image"] = e.floats_per_image;
          j["total_bytes"] = e.total_bytes;
          j["total_gib"] = e.total_gib;
          j["gib"] = e.gib_text();
          o << j.dump() << "\n";
        } else {
          o << e.gib_text() << " GiB\n";
        }
      });
    };
  }
};

struct MineNegatives {
  Common c;
  std::string index_path, queries_path, qrels_path, query_norm = "auto";
  std::int64_t k = 4;
  std::size_t candidates = 100;
  double threshold = curation::kDefaultMiningThreshold;

  Action attach(CLI::App* sub) {
    sub->add_option("--index", index_path, "corpus index scored by the MaxSim teacher")->required();
    sub->add_option("--queries", queries_path, "queries: .cmx or .jsonl")->required();
    sub->add_option("--qrels", qrels_path, "positives: every judgment with grade > 0")->required();
    sub->add_option("--k", k, "negatives per triplet")->capture_default_str();
    sub->add_option("--candidates", candidates, "teacher top-N searched per query")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--threshold", threshold, "keep candidates below threshold x positive score")
        ->capture_default_str();
    sub->add_option("--normalize-queries", query_norm, "auto follows the index's normalized flag")
        ->check(CLI::IsMember({"auto", "on", "off"}))
        ->capture_default_str();
    add_common(sub, c, "triplets as JSON lines", true);
    return [this](std::ostream& out, std::ostream& err) {
      guard_inputs(c.out, {index_path, queries_path, qrels_path});
      const auto index = store::IndexHandle::load(index_path);
      const auto queries = read_collection(queries_path);
      const auto qrels = eval::read_qrels(qrels_path);
      std::unordered_map<std::string, std::size_t> row;
      for (std::size_t i = 0; i < index.size(); ++i) row.emplace(index.doc_id(i), i);
      const bool norm = want_normalized_queries(query_norm, index);
      const auto so = search_options(c, "dot");

      std::vector<curation::TrainingTriplet> triplets;
      for (const auto& raw : queries) {
        const auto* judged = qrels.judgments(raw.id());
        if (!judged) continue;
        const MultiVector q = norm ? normalized(raw) : raw;
        const auto top = search(q, index, candidates, so);
        for (const auto& [positive, grade] : *judged) {
          if (grade <= 0) continue;
          // Other known positives of this query are never offered as negatives.
          std::map<std::string, double> pool;
          for (const auto& h : top.hits) {
            if (h.doc_id == positive || qrels.relevance(raw.id(), h.doc_id) <= 0) pool[h.doc_id] = h.score;
          }
          if (const auto it = row.find(positive); it != row.end()) {
            pool[positive] = maxsim_score(q, index.doc_tokens(it->second));
          }
          triplets.push_back(curation::mine_hard_negatives(raw.id(), positive, pool, k, threshold));
        }
      }
      curation::write_triplets(triplets, c.out);
      out << "mined " << triplets.size() << " triplets -> " << c.out << "\n";
      err << "teacher: exhaustive MaxSim, top " << candidates << " candidates per query\n";
    };
  }
};

struct SampleClusters {
  Common c;
  std::string input;
  std::size_t per_cluster = 10, k_max = 8, draws = 10, clusters = 0, max_iters = 100, restarts = 2;

  Action attach(CLI::App* sub) {
    sub->add_option("--input", input, "corpus: .cmx or .jsonl")->required();
    sub->add_option("--per-cluster", per_cluster, "documents drawn from each cluster")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-max", k_max, "largest k tried by the gap statistic")->capture_default_str();
    sub->add_option("--reference-draws", draws, "uniform reference sets per k")->capture_default_str();
    sub->add_option("--clusters", clusters, "fixed k; 0 chooses k by the gap statistic")->capture_default_str();
    sub->add_option("--max-iters", max_iters, "Lloyd iterations per k-means run")->capture_default_str();
    sub->add_option("--restarts", restarts, "k-means restarts")->capture_default_str();
    add_common(sub, c, "output directory (assignments.csv, gap.csv, sample.txt)", true);
    return [this](std::ostream& out, std::ostream& err) {
      const auto docs = read_collection(input);
      if (docs.empty()) throw Error(ErrorCode::EmptyIndex, "empty corpus");
      std::vector<Vector> points;
      points.reserve(docs.size());
      for (const auto& d : docs) points.push_back(pooled_embedding(d));
      if (points.front().size() > curation::kClusteringDim) {
        points = curation::reduce_for_clustering(points);
      } else {
        err << "dim " << points.front().size() << " <= " << curation::kClusteringDim
            << ": clustering pooled vectors without PCA\n";
      }

      fs::create_directories(c.out);
      std::size_t k = clusters;
      if (k == 0) {
        curation::GapOptions go;
        go.k_max = k_max;
        go.reference_draws = draws;
        go.seed = c.seed;
        go.max_iters = max_iters;
        go.restarts = restarts;
        const auto curve = curation::gap_statistic_select_k(points, go);
        k = curve.chosen_k;
        with_output((fs::path(c.out) / "gap.csv").string(), out, [&](std::ostream& o) {
          o << "k,within_dispersion,gap,sd\n";
          for (const auto& p : curve.points) {
            o << p.k << ',' << fixed(p.within_dispersion, 6) << ',' << fixed(p.gap, 6) << ','
              << fixed(p.sd, 6) << "\n";
          }
        });
      }
      curation::KMeansOptions ko;
      ko.seed = derive_seed(c.seed, 0xc1u);
      ko.max_iters = max_iters;
      ko.restarts = restarts;
      const auto km = curation::kmeans(points, k, ko);
      std::vector<curation::ClusterAssignment> assignments;
      for (std::size_t i = 0; i < docs.size(); ++i) assignments.push_back({docs[i].id(), km.labels[i]});
      curation::write_assignments(assignments, fs::path(c.out) / "assignments.csv");
      const auto sample = curation::cluster_uniform_sample(assignments, per_cluster, c.seed);
      with_output((fs::path(c.out) / "sample.txt").string(), out, [&](std::ostream& o) {
        for (const auto& id : sample) o << id << "\n";
      });
      out << "clusters " << k << "\n" << "sampled " << sample.size() << "\n";
    };
  }
};

struct Quantize {
  Common c;
  std::string input, precision = "fp16";

  Action attach(CLI::App* sub) {
    sub->add_option("--index", input, "source index")->required();
    add_precision(sub, precision, "target precision")->required();
    add_common(sub, c, "index file to write", true);
    return [this](std::ostream& out, std::ostream&) {
      guard_inputs(c.out, {input});
      const auto source = store::IndexHandle::load(input);
      const auto docs = source.documents();
      const auto built = store::IndexHandle::build(docs, parse_precision(precision), false);
      const auto result = with_normalized_flag(built, source.normalized());
      result.save(c.out);
      out << "quantized " << result.size() << " documents " << precision_name(source.precision()) << " -> "
          << precision_name(result.precision()) << " (" << result.payload().size() << " payload bytes)\n";
    };
  }
};

struct Project {
  Common c;
  std::string input, precision, load_path, save_path;
  std::size_t target_dim = 0, sample = 50000;
  bool renormalize = true;

  Action attach(CLI::App* sub) {
    sub->add_option("--input", input, "collection: .cmx or .jsonl")->required();
    sub->add_option("--target-dim", target_dim, "output dimension when fitting");
    sub->add_option("--projection", load_path, "apply this saved projection instead of fitting one");
    sub->add_option("--save-projection", save_path, "write the fitted projection (JSON)");
    sub->add_option("--sample", sample, "tokens sampled to fit the projection")->capture_default_str();
    sub->add_option("--precision", precision, "output precision (default fp32)")
        ->check(CLI::IsMember(kPrecisions, CLI::ignore_case));
    sub->add_flag("--renormalize,!--no-renormalize", renormalize, "L2-normalise projected tokens")
        ->capture_default_str();
    add_common(sub, c, "index file to write", true);
    return [this](std::ostream& out, std::ostream& err) {
      guard_inputs(c.out, {input, load_path});
      guard_inputs(save_path, {input, load_path, c.out});
      const auto docs = read_collection(input);
      if (docs.empty()) throw Error(ErrorCode::EmptyIndex, "empty collection");
      store::ProjectionMatrix proj;
      if (!load_path.empty()) {
        proj = store::load_projection(load_path);
      } else {
        if (target_dim == 0) throw Error(ErrorCode::InvalidArgument, "--target-dim or --projection is required");
        std::vector<std::pair<std::size_t, std::size_t>> all;
        for (std::size_t d = 0; d < docs.size(); ++d) {
          for (std::size_t t = 0; t < docs[d].token_count(); ++t) all.emplace_back(d, t);
        }
        std::vector<std::pair<std::size_t, std::size_t>> picked;
        Rng rng = make_rng(c.seed, 0x9c4);
        std::sample(all.begin(), all.end(), std::back_inserter(picked), std::min(sample, all.size()), rng);
        std::vector<float> flat;
        for (const auto& [d, t] : picked) {
          const auto tok = docs[d].token(t);
          flat.insert(flat.end(), tok.begin(), tok.end());
        }
        proj = store::fit_projection(flat, docs.front().dim(), target_dim);
        err << "fitted " << proj.rows << "x" << proj.cols << " projection on " << picked.size() << " tokens\n";
      }
      if (!save_path.empty()) store::save_projection(proj, save_path);
      std::vector<MultiVector> projected;
      projected.reserve(docs.size());
      for (const auto& d : docs) projected.push_back(store::apply_projection(d, proj, renormalize));
      const Precision p = precision.empty() ? Precision::FP32 : parse_precision(precision);
      const auto built = store::IndexHandle::build(projected, p, false);
      with_normalized_flag(built, renormalize).save(c.out);
      out << "projected " << projected.size() << " documents " << proj.cols << " -> " << proj.rows
          << " dims -> " << c.out << "\n";
    };
  }
};

struct Merge {
  Common c;
  std::vector<std::string> inputs;
  std::vector<double> weights;

  Action attach(CLI::App* sub) {
    sub->add_option("--inputs", inputs, "parameter manifests")->required()->delimiter(',');
    sub->add_option("--weights", weights, "non-negative weights (default uniform)")->delimiter(',');
    add_common(sub, c, "manifest to write (blob goes next to it)", true);
    return [this](std::ostream& out, std::ostream&) {
      guard_inputs(c.out, inputs);
      std::vector<training::ParamSet> members;
      for (const auto& in : inputs) members.push_back(training::load_params(in));
      const auto spec = weights.empty() ? training::MergeSpec::uniform(std::move(members))
                                        : training::MergeSpec(std::move(members), weights);
      const auto merged = training::merge_models(spec);
      training::save_params(merged, c.out);
      out << "merged " << inputs.size() << " parameter sets (" << merged.size() << " tensors) -> " << c.out << "\n";
    };
  }
};

struct GenBench {
  Common c;
  eval::BenchmarkConfig cfg;

  Action attach(CLI::App* sub) {
    auto& ps = cfg.planted;
    sub->add_option("--docs", cfg.n_docs, "corpus size")->capture_default_str();
    sub->add_option("--queries", cfg.n_queries, "query count")->capture_default_str();
    sub->add_option("--dim", cfg.dim, "embedding dimension")->capture_default_str();
    sub->add_option("--avg-tokens", cfg.tokens.mean, "mean tokens per document")->capture_default_str();
    sub->add_option("--token-sd", cfg.tokens.stddev, "token count spread")->capture_default_str();
    sub->add_option("--min-tokens", cfg.tokens.min, "token count floor")->capture_default_str();
    sub->add_option("--max-tokens", cfg.tokens.max, "token count ceiling")->capture_default_str();
    sub->add_option("--latent-rank", ps.latent_rank, "rank of the token subspace")->capture_default_str();
    sub->add_option("--topics", ps.topics, "mixture topics")->capture_default_str();
    sub->add_option("--atoms-per-topic", ps.atoms_per_topic, "token atoms per topic")->capture_default_str();
    sub->add_option("--topic-weight", ps.topic_weight, "pull of atoms toward their topic")->capture_default_str();
    sub->add_option("--doc-jitter", ps.doc_jitter, "per-token document-specific jitter")->capture_default_str();
    sub->add_option("--ambient-noise", ps.ambient_noise, "noise outside the subspace")->capture_default_str();
    sub->add_option("--query-tokens", ps.query_tokens, "tokens per query")->capture_default_str();
    sub->add_option("--query-noise", ps.query_noise, "perturbation of copied query tokens")->capture_default_str();
    sub->add_option("--near-duplicate-rate", ps.near_duplicate_rate, "queries with a grade-1 near copy")
        ->capture_default_str();
    sub->add_option("--near-duplicate-jitter", ps.near_duplicate_jitter, "perturbation of near copies")
        ->capture_default_str();
    add_common(sub, c, "output directory (corpus.cmx, queries.cmx, qrels.txt)", true, cfg.seed);
    return [this](std::ostream& out, std::ostream&) {
      cfg.seed = c.seed;
      const auto bench = eval::generate_synthetic_benchmark(cfg);
      eval::write_benchmark(bench, c.out);
      out << "generated " << bench.corpus.size() << " documents, " << bench.queries.size() << " queries, "
          << bench.qrels.size() << " judgments -> " << c.out << "\n";
    };
  }
};

struct Ablate {
  Common c;
  std::string bench_dir, corpus_path, queries_path, qrels_path;
  std::vector<std::string> configs;
  std::size_t k = 10, projection_sample = 50000;
  std::uint64_t storage_docs = 1000000;

  Action attach(CLI::App* sub) {
    sub->add_option("--bench", bench_dir, "directory written by gen-bench");
    sub->add_option("--corpus", corpus_path, "corpus (.cmx or .jsonl), instead of --bench");
    sub->add_option("--queries", queries_path, "queries, instead of --bench");
    sub->add_option("--qrels", qrels_path, "qrels, instead of --bench");
    sub->add_option("--configs", configs, "label:dim:precision entries; the first is the baseline")
        ->delimiter(',');
    sub->add_option("--k", k, "NDCG cutoff")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--storage-docs", storage_docs, "pages assumed by the storage columns (0 = the actual corpus)")
        ->capture_default_str();
    sub->add_option("--projection-sample", projection_sample, "tokens used to fit each projection")
        ->capture_default_str();
    add_common(sub, c, "output directory (ablation.csv, ablation.md)", true);
    return [this](std::ostream& out, std::ostream& err) {
      if (!bench_dir.empty()) {
        corpus_path = (fs::path(bench_dir) / "corpus.cmx").string();
        queries_path = (fs::path(bench_dir) / "queries.cmx").string();
        qrels_path = (fs::path(bench_dir) / "qrels.txt").string();
      }
      if (corpus_path.empty() || queries_path.empty() || qrels_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give --bench or all of --corpus, --queries, --qrels");
      }
      const auto corpus = read_collection(corpus_path);
      const auto queries = read_collection(queries_path);
      const auto qrels = eval::read_qrels(qrels_path);
      if (corpus.empty()) throw Error(ErrorCode::EmptyIndex, "empty corpus");
      const std::size_t dim = corpus.front().dim();

      std::vector<eval::AblationConfig> table;
      if (configs.empty()) {
        table = {{"full", dim, Precision::FP16}, {"half", dim / 2, Precision::FP16},
                 {"quarter", dim / 4, Precision::FP16}, {"int8", dim, Precision::INT8}};
        if (dim % 8 == 0) table.push_back({"binary", dim, Precision::BINARY});
      }
      for (const auto& entry : configs) {
        const auto a = entry.find(':');
        const auto b = entry.rfind(':');
        if (a == std::string::npos || a == b) {
          throw Error(ErrorCode::InvalidArgument, "config '" + entry + "' is not label:dim:precision");
        }
        std::size_t d = 0;
        try {
          d = std::stoul(entry.substr(a + 1, b - a - 1));
        } catch (const std::exception&) {
          throw Error(ErrorCode::InvalidArgument, "config '" + entry + "' has a bad dim");
        }
        table.push_back({entry.substr(0, a), d, parse_precision(entry.substr(b + 1))});
      }

      eval::AblationOptions opts;
      opts.k = k;
      opts.seed = c.seed;
      opts.workers = c.workers;
      opts.projection_sample = projection_sample;
      if (storage_docs > 0) opts.storage_docs = storage_docs;
      const auto rows = eval::run_ablation(corpus, queries, qrels, table, opts);

      fs::create_directories(c.out);
      const auto csv = eval::to_csv(rows);
      with_output((fs::path(c.out) / "ablation.csv").string(), out, [&](std::ostream& o) { o << csv; });
      with_output((fs::path(c.out) / "ablation.md").string(), out,
                  [&](std::ostream& o) { o << eval::to_markdown(rows); });
      out << csv;
      err << "ablation tables written to " << c.out << "\n";
    };
  }
};

// Holds every subcommand's flag storage for the lifetime of one run.
struct Commands {
  BuildIndex build_index;
  Search search;
  Evaluate evaluate;
  EstimateStorage estimate_storage;
  MineNegatives mine_negatives;
  SampleClusters sample_clusters;
  Quantize quantize;
  Project project;
  Merge merge;
  GenBench gen_bench;
  Ablate ablate;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"colmax: late-interaction retrieval and data-curation toolkit", "colmax"};
  app.require_subcommand(1, 1);

  Commands cmds;
  std::map<CLI::App*, Action> actions;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    auto* sub = app.add_subcommand(name, help);
    actions.emplace(sub, cmd.attach(sub));
  };
  add("build-index", "encode a collection into an index file", cmds.build_index);
  add("search", "rank an index for every query; writes a TREC run", cmds.search);
  add("evaluate", "NDCG@k of a TREC run against qrels", cmds.evaluate);
  add("estimate-storage", "embedding storage for a corpus configuration", cmds.estimate_storage);
  add("mine-negatives", "positive-aware hard negatives with a MaxSim teacher", cmds.mine_negatives);
  add("sample-clusters", "gap-statistic k-means over pooled documents, then per-cluster sampling",
      cmds.sample_clusters);
  add("quantize", "re-encode an index at another precision", cmds.quantize);
  add("project", "PCA-project a collection to fewer dimensions", cmds.project);
  add("merge", "weighted average of parameter sets", cmds.merge);
  add("gen-bench", "generate the planted-relevance synthetic benchmark", cmds.gen_bench);
  add("ablate", "embedding-size ablation: storage and NDCG per configuration", cmds.ablate);

  try {
    auto resolved = apply_config(args);
    std::reverse(resolved.begin(), resolved.end());
    app.parse(resolved);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n";
    CLI::App* scope = &app;
    for (const auto& [sub, action] : actions) {
      if (std::find(args.begin(), args.end(), sub->get_name()) != args.end()) scope = sub;
    }
    err << scope->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitDataError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  err << "# colmax " << chosen->get_name() << "\n" << chosen->config_to_str(true, false);
  try {
    actions.at(chosen)(out, err);
  } catch (const Error& e) {
    err << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: IoFailure: " << e.what() << "\n";
    return kExitDataError;
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitOk;
}

}  // namespace colmax::cli

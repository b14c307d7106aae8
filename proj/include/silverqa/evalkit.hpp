#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/dense_encoder.hpp"
#include "silverqa/pair_scorer.hpp"
#include "silverqa/sparse_index.hpp"

namespace silverqa {

// Per-question ranking outcome: candidate ids in descending score order plus
// the question's gold set.
struct RankedResult {
  std::string question_id;
  std::vector<std::string> ranked;
  std::unordered_set<std::string> gold;
};

// Fraction of questions with any gold candidate among the first n ranks.
inline double precision_at_n(const std::vector<RankedResult>& results, size_t n) {
  if (n < 1) throw ConfigError("precision_at_n: n must be >= 1");
  if (results.empty()) throw DataError("precision_at_n: empty results");
  size_t hits = 0;
  for (const auto& r : results) {
    const size_t limit = std::min(n, r.ranked.size());
    for (size_t i = 0; i < limit; ++i) {
      if (r.gold.count(r.ranked[i])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

// Mean reciprocal rank of the first correct answer; questions whose first
// gold sits beyond the cutoff contribute 0.
inline double mrr(const std::vector<RankedResult>& results, size_t cutoff = 100) {
  if (cutoff < 1) throw ConfigError("mrr: cutoff must be >= 1");
  if (results.empty()) throw DataError("mrr: empty results");
  double total = 0.0;
  for (const auto& r : results) {
    const size_t limit = std::min(cutoff, r.ranked.size());
    for (size_t i = 0; i < limit; ++i) {
      if (r.gold.count(r.ranked[i])) {
        total += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(results.size());
}

struct MetricsReport {
  std::map<int, double> p_at;  // N in {1, 5, 10}
  double mrr_value = 0.0;
  size_t num_questions = 0;
  size_t cutoff = 0;
};

inline MetricsReport evaluate_ranked(const std::vector<RankedResult>& results, size_t cutoff) {
  MetricsReport rep;
  for (int n : {1, 5, 10}) rep.p_at[n] = precision_at_n(results, static_cast<size_t>(n));
  rep.mrr_value = mrr(results, cutoff);
  rep.num_questions = results.size();
  rep.cutoff = cutoff;
  return rep;
}

namespace detail {

template <typename RankFn>
std::vector<RankedResult> rank_test_split(const DatasetSplit& test, size_t depth, RankFn&& rank) {
  if (test.pool.empty()) throw DataError("evaluate_retriever: empty test pool");
  auto gold_by_q = test.gold_by_question();
  std::vector<RankedResult> results;
  results.reserve(test.questions.size());
  for (const auto& q : test.questions) {
    auto git = gold_by_q.find(q.id);
    if (git == gold_by_q.end() || git->second.empty()) {
      throw DataError("question '" + q.id + "' has no gold candidates");
    }
    RankedResult r;
    r.question_id = q.id;
    r.gold.insert(git->second.begin(), git->second.end());
    for (const auto& sc : rank(q, depth)) r.ranked.push_back(sc.id);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace detail

// Brute-force evaluation of the dense retriever over the split's full pool.
inline MetricsReport evaluate_retriever(const EncoderModel& model, const Vocab& vocab,
                                        const DatasetSplit& test, size_t cutoff = 100) {
  PoolEmbeddings pool = encode_pool(model, vocab, test.pool);
  const size_t depth = std::max<size_t>(cutoff, 10);
  auto results = detail::rank_test_split(test, depth, [&](const Question& q, size_t k) {
    EmbeddingVec qv = encode_question(model, vocab, tokenize(q.text));
    return dense_top_k(qv, pool, k, static_cast<double>(model.scale));
  });
  return evaluate_ranked(results, cutoff);
}

// BM25 baseline over the same protocol. Candidates sharing no term with the
// question are never ranked, so an unmatched gold counts as a miss.
inline MetricsReport evaluate_retriever(const Bm25Index& index, const DatasetSplit& test,
                                        size_t cutoff = 100) {
  const size_t depth = std::max<size_t>(cutoff, 10);
  auto results = detail::rank_test_split(
      test, depth, [&](const Question& q, size_t k) { return index.top_k(tokenize(q.text), k); });
  return evaluate_ranked(results, cutoff);
}

struct MetricDelta {
  double a = 0.0;
  double b = 0.0;
  double abs_delta = 0.0;
  double rel_delta = 0.0;  // (b - a) / a, or 0 when a == 0
};

// Per-metric deltas between two runs over the same test set.
inline std::map<std::string, MetricDelta> compare_runs(const MetricsReport& a,
                                                       const MetricsReport& b) {
  if (a.num_questions != b.num_questions || a.cutoff != b.cutoff) {
    throw DataError("compare_runs: reports describe different test sets");
  }
  std::map<std::string, MetricDelta> out;
  auto add = [&](const std::string& name, double va, double vb) {
    MetricDelta d;
    d.a = va;
    d.b = vb;
    d.abs_delta = vb - va;
    d.rel_delta = va == 0.0 ? 0.0 : (vb - va) / va;
    out[name] = d;
  };
  for (const auto& [n, va] : a.p_at) add("p_at_" + std::to_string(n), va, b.p_at.at(n));
  add("mrr", a.mrr_value, b.mrr_value);
  return out;
}

// --- reporting ----------------------------------------------------------------

inline void save_metrics(const MetricsReport& r, std::ostream& os) {
  char buf[64];
  os << "silverqa metrics 1\n";
  os << "num_questions " << r.num_questions << "\n";
  os << "cutoff " << r.cutoff << "\n";
  for (const auto& [n, v] : r.p_at) {
    std::snprintf(buf, sizeof(buf), "p_at_%d %.6f\n", n, v);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "mrr %.6f\n", r.mrr_value);
  os << buf;
}

inline void save_metrics_file(const MetricsReport& r, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write metrics file: " + path);
  save_metrics(r, os);
}

inline MetricsReport load_metrics_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open metrics file: " + path);
  std::string header;
  std::getline(is, header);
  if (header != "silverqa metrics 1") throw DataError("bad metrics header: '" + header + "'");
  MetricsReport r;
  std::string key;
  while (is >> key) {
    if (key == "num_questions") {
      is >> r.num_questions;
    } else if (key == "cutoff") {
      is >> r.cutoff;
    } else if (key.rfind("p_at_", 0) == 0) {
      int n = std::stoi(key.substr(5));
      is >> r.p_at[n];
    } else if (key == "mrr") {
      is >> r.mrr_value;
    } else {
      throw DataError("unknown metrics key '" + key + "'");
    }
  }
  return r;
}

// Plain-text table with one row per run, percentage metrics.
inline std::string format_metrics_table(
    const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out;
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%-28s %8s %8s %8s %8s\n", "model", "P@1", "P@5", "P@10",
                "MRR");
  out += buf;
  for (const auto& [name, r] : rows) {
    std::snprintf(buf, sizeof(buf), "%-28s %8.1f %8.1f %8.1f %8.1f\n", name.c_str(),
                  100.0 * r.p_at.at(1), 100.0 * r.p_at.at(5), 100.0 * r.p_at.at(10),
                  100.0 * r.mrr_value);
    out += buf;
  }
  return out;
}

inline std::string format_comparison(const MetricsReport& a, const MetricsReport& b,
                                     const std::string& name_a, const std::string& name_b) {
  std::string out = format_metrics_table({{name_a, a}, {name_b, b}});
  auto deltas = compare_runs(a, b);
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%-28s %+8.1f %+8.1f %+8.1f %+8.1f\n", "delta",
                100.0 * deltas.at("p_at_1").abs_delta, 100.0 * deltas.at("p_at_5").abs_delta,
                100.0 * deltas.at("p_at_10").abs_delta, 100.0 * deltas.at("mrr").abs_delta);
  out += buf;
  return out;
}

}  // namespace silverqa

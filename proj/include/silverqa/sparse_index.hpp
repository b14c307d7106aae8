#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/textproc.hpp"

namespace silverqa {

// Candidate evidence as seen by every retrieval component: the answer
// sentence concatenated with its context.
inline TokenSeq candidate_tokens(const CandidateEntry& e) {
  TokenSeq toks = tokenize(e.sentence);
  TokenSeq ctx = tokenize(e.context);
  toks.insert(toks.end(), ctx.begin(), ctx.end());
  return toks;
}

inline Vocab build_vocab(const CandidatePool& pool, uint64_t min_df = 1) {
  if (pool.empty()) throw DataError("build_vocab: empty pool");
  std::vector<TokenSeq> docs;
  docs.reserve(pool.size());
  for (const auto& e : pool.entries()) docs.push_back(candidate_tokens(e));
  return build_vocab_from_docs(docs, min_df);
}

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct ScoredCandidate {
  std::string id;
  double score = 0.0;
};

// Okapi BM25 inverted index over a candidate pool. Candidates are stored in
// ascending id order, postings in ascending candidate order, so builds are
// deterministic and serialized indexes byte-identical for equal pools.
class Bm25Index {
 public:
  Bm25Index() = default;

  static Bm25Index build(const CandidatePool& pool, Vocab vocab, Bm25Params params = {}) {
    if (pool.empty()) throw DataError("build_index: empty pool");
    Bm25Index idx;
    idx.params_ = params;
    idx.vocab_ = std::move(vocab);

    std::vector<size_t> order(pool.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return pool.at(a).id < pool.at(b).id;
    });

    idx.postings_.assign(idx.vocab_.size(), {});
    uint64_t total_len = 0;
    std::unordered_map<int32_t, uint32_t> tf;
    for (size_t rank = 0; rank < order.size(); ++rank) {
      const CandidateEntry& e = pool.at(order[rank]);
      TokenSeq toks = candidate_tokens(e);
      idx.doc_ids_.push_back(e.id);
      idx.doc_len_.push_back(toks.size());
      idx.doc_index_.emplace(e.id, rank);
      total_len += toks.size();
      tf.clear();
      for (const auto& t : toks) {
        int32_t id = idx.vocab_.id_of(t);
        if (id >= 0) ++tf[id];
      }
      // postings stay doc-ordered because docs are visited in id order
      std::vector<int32_t> present;
      present.reserve(tf.size());
      for (const auto& [tid, _] : tf) present.push_back(tid);
      std::sort(present.begin(), present.end());
      for (int32_t tid : present) {
        idx.postings_[static_cast<size_t>(tid)].push_back(
            {static_cast<uint32_t>(rank), tf[tid]});
      }
    }
    idx.avg_len_ = static_cast<double>(total_len) / static_cast<double>(order.size());
    return idx;
  }

  static Bm25Index build(const CandidatePool& pool, Bm25Params params = {}) {
    return build(pool, build_vocab(pool), params);
  }

  size_t num_docs() const { return doc_ids_.size(); }
  double avg_len() const { return avg_len_; }
  const Bm25Params& params() const { return params_; }
  const Vocab& vocab() const { return vocab_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }

  uint64_t doc_len(const std::string& cand_id) const {
    return doc_len_[doc_rank(cand_id)];
  }

  // Additive over query term occurrences: a term repeated in the query
  // contributes once per occurrence.
  double score(const TokenSeq& query, const std::string& cand_id) const {
    return score_at(query, doc_rank(cand_id));
  }

  // Descending score, ties broken by ascending candidate id. Candidates with
  // no matching term are never returned.
  std::vector<ScoredCandidate> top_k(const TokenSeq& query, size_t k) const {
    if (k < 1) throw ConfigError("top_k: k must be >= 1");
    auto terms = query_term_counts(query);
    std::vector<char> touched(doc_ids_.size(), 0);
    std::vector<uint32_t> matched;
    for (const auto& [tid, count] : terms) {
      (void)count;
      for (const auto& [rank, tf] : postings_[static_cast<size_t>(tid)]) {
        (void)tf;
        if (!touched[rank]) {
          touched[rank] = 1;
          matched.push_back(rank);
        }
      }
    }
    std::vector<std::pair<double, uint32_t>> scored;
    scored.reserve(matched.size());
    for (uint32_t rank : matched) scored.push_back({score_terms(terms, rank), rank});
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;  // doc rank order == id order
    });
    if (scored.size() > k) scored.resize(k);
    std::vector<ScoredCandidate> out;
    out.reserve(scored.size());
    for (const auto& [s, rank] : scored) out.push_back({doc_ids_[rank], s});
    return out;
  }

  void save(std::ostream& os) const {
    os.write(kMagic, 8);
    write_u32le(os, 1);
    write_f64le(os, params_.k1);
    write_f64le(os, params_.b);
    write_u64le(os, doc_ids_.size());
    write_u64le(os, vocab_.size());
    for (size_t i = 0; i < vocab_.size(); ++i) {
      write_string(os, vocab_.token_at(static_cast<int32_t>(i)));
      write_u64le(os, vocab_.df_at(static_cast<int32_t>(i)));
    }
    for (size_t i = 0; i < doc_ids_.size(); ++i) {
      write_string(os, doc_ids_[i]);
      write_u64le(os, doc_len_[i]);
    }
    for (const auto& plist : postings_) {
      write_u64le(os, plist.size());
      for (const auto& [rank, tf] : plist) {
        write_u32le(os, rank);
        write_u32le(os, tf);
      }
    }
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write index file: " + path);
    save(os);
  }

  static Bm25Index load(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string_view(magic, 8) != std::string_view(kMagic, 8)) {
      throw DataError("bad index magic");
    }
    uint32_t version = read_u32le(is);
    if (version != 1) throw DataError("unsupported index version " + std::to_string(version));
    Bm25Index idx;
    idx.params_.k1 = read_f64le(is);
    idx.params_.b = read_f64le(is);
    uint64_t n_docs = read_u64le(is);
    uint64_t n_vocab = read_u64le(is);
    std::vector<std::pair<std::string, uint64_t>> token_dfs;
    token_dfs.reserve(n_vocab);
    for (uint64_t i = 0; i < n_vocab; ++i) {
      std::string tok = read_string(is);
      uint64_t df = read_u64le(is);
      token_dfs.emplace_back(std::move(tok), df);
    }
    idx.vocab_ = Vocab(std::move(token_dfs), n_docs);
    uint64_t total_len = 0;
    for (uint64_t i = 0; i < n_docs; ++i) {
      std::string id = read_string(is);
      uint64_t len = read_u64le(is);
      idx.doc_index_.emplace(id, idx.doc_ids_.size());
      idx.doc_ids_.push_back(std::move(id));
      idx.doc_len_.push_back(len);
      total_len += len;
    }
    idx.avg_len_ = static_cast<double>(total_len) / static_cast<double>(n_docs);
    idx.postings_.resize(n_vocab);
    for (uint64_t i = 0; i < n_vocab; ++i) {
      uint64_t len = read_u64le(is);
      auto& plist = idx.postings_[i];
      plist.reserve(len);
      for (uint64_t j = 0; j < len; ++j) {
        uint32_t rank = read_u32le(is);
        uint32_t tf = read_u32le(is);
        plist.push_back({rank, tf});
      }
    }
    return idx;
  }

  static Bm25Index load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open index file: " + path);
    return load(is);
  }

 private:
  static constexpr const char kMagic[9] = "SQAIDX1\n";

  size_t doc_rank(const std::string& cand_id) const {
    auto it = doc_index_.find(cand_id);
    if (it == doc_index_.end()) throw DataError("unknown candidate id '" + cand_id + "'");
    return it->second;
  }

  uint32_t term_freq(int32_t token_id, uint32_t rank) const {
    const auto& plist = postings_[static_cast<size_t>(token_id)];
    auto it = std::lower_bound(plist.begin(), plist.end(), rank,
                               [](const auto& p, uint32_t r) { return p.first < r; });
    if (it == plist.end() || it->first != rank) return 0;
    return it->second;
  }

  // Query occurrences are folded into per-term counts and accumulated in
  // ascending token-id order, so the score is exactly invariant to query
  // token order while each occurrence still contributes.
  std::vector<std::pair<int32_t, uint32_t>> query_term_counts(const TokenSeq& query) const {
    std::unordered_map<int32_t, uint32_t> counts;
    for (const auto& t : query) {
      int32_t tid = vocab_.id_of(t);
      if (tid >= 0) ++counts[tid];
    }
    std::vector<std::pair<int32_t, uint32_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted;
  }

  double score_at(const TokenSeq& query, size_t rank) const {
    return score_terms(query_term_counts(query), rank);
  }

  double score_terms(const std::vector<std::pair<int32_t, uint32_t>>& terms, size_t rank) const {
    const double k1 = params_.k1;
    const double b = params_.b;
    const double len_norm = 1.0 - b + b * static_cast<double>(doc_len_[rank]) / avg_len_;
    double total = 0.0;
    for (const auto& [tid, count] : terms) {
      uint32_t tf = term_freq(tid, static_cast<uint32_t>(rank));
      if (tf == 0) continue;
      double f = static_cast<double>(tf);
      total += static_cast<double>(count) * vocab_.idf_for_df(vocab_.df_at(tid)) * f *
               (k1 + 1.0) / (f + k1 * len_norm);
    }
    return total;
  }

  Vocab vocab_;
  Bm25Params params_;
  std::vector<std::string> doc_ids_;  // ascending
  std::vector<uint64_t> doc_len_;
  double avg_len_ = 0.0;
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> postings_;  // (doc rank, tf)
  std::unordered_map<std::string, size_t> doc_index_;
};

}  // namespace silverqa

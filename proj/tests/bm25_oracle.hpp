#pragma once

// Brute-force BM25 oracle, independent of the inverted-index implementation:
// recomputes document frequencies, lengths, and scores directly from the raw
// candidate texts, scores every candidate, and sorts. Shares only the scoring
// formula and the (token-id ascending) accumulation order with the index so
// results can be compared exactly.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "silverqa/corpus.hpp"
#include "silverqa/sparse_index.hpp"
#include "silverqa/textproc.hpp"

class Bm25Oracle {
 public:
  Bm25Oracle(const silverqa::CandidatePool& pool, double k1, double b) : k1_(k1), b_(b) {
    for (const auto& e : pool.entries()) {
      Doc d;
      d.id = e.id;
      silverqa::TokenSeq toks = silverqa::tokenize(e.sentence);
      silverqa::TokenSeq ctx = silverqa::tokenize(e.context);
      toks.insert(toks.end(), ctx.begin(), ctx.end());
      d.len = toks.size();
      for (const auto& t : toks) ++d.tf[t];
      docs_.push_back(std::move(d));
    }
    std::sort(docs_.begin(), docs_.end(), [](const Doc& a, const Doc& b2) { return a.id < b2.id; });
    for (const auto& d : docs_) {
      for (const auto& [tok, tf] : d.tf) ++df_[tok];
      total_len_ += static_cast<double>(d.len);
    }
    avg_len_ = total_len_ / static_cast<double>(docs_.size());
  }

  double idf(const std::string& token) const {
    auto it = df_.find(token);
    const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
    const double n = static_cast<double>(docs_.size());
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
  }

  double score_doc(const silverqa::TokenSeq& query, size_t doc_idx) const {
    // fold query occurrences per term; accumulate in ascending token order
    // (the index's token ids are lexicographic ranks)
    std::map<std::string, uint32_t> counts;
    for (const auto& t : query) {
      if (df_.count(t)) ++counts[t];
    }
    const Doc& d = docs_[doc_idx];
    const double len_norm = 1.0 - b_ + b_ * static_cast<double>(d.len) / avg_len_;
    double total = 0.0;
    for (const auto& [tok, count] : counts) {
      auto it = d.tf.find(tok);
      if (it == d.tf.end()) continue;
      const double f = static_cast<double>(it->second);
      total += static_cast<double>(count) * idf(tok) * f * (k1_ + 1.0) / (f + k1_ * len_norm);
    }
    return total;
  }

  // Every candidate scored, zero scores removed, sorted by (score desc, id asc).
  std::vector<silverqa::ScoredCandidate> rank_all(const silverqa::TokenSeq& query) const {
    std::vector<silverqa::ScoredCandidate> out;
    for (size_t i = 0; i < docs_.size(); ++i) {
      const double s = score_doc(query, i);
      if (s > 0.0) out.push_back({docs_[i].id, s});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const silverqa::ScoredCandidate& a, const silverqa::ScoredCandidate& b2) {
                       if (a.score != b2.score) return a.score > b2.score;
                       return a.id < b2.id;
                     });
    return out;
  }

 private:
  struct Doc {
    std::string id;
    size_t len = 0;
    std::map<std::string, uint32_t> tf;
  };
  double k1_, b_;
  std::vector<Doc> docs_;
  std::map<std::string, uint64_t> df_;
  double total_len_ = 0.0;
  double avg_len_ = 0.0;
};

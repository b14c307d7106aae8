#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "silverqa/common.hpp"

namespace silverqa {

using TokenSeq = std::vector<std::string>;

namespace detail {

// Incremental UTF-8 decoder. Invalid bytes are interpreted as Latin-1 so
// tokenization never fails; the fallback is deterministic.
inline uint32_t next_codepoint(std::string_view s, size_t& i) {
  auto byte = [&](size_t k) { return static_cast<unsigned char>(s[k]); };
  unsigned char b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto is_cont = [&](size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
  if ((b0 & 0xE0) == 0xC0 && is_cont(i + 1)) {
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && is_cont(i + 1) && is_cont(i + 2)) {
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x0F) << 12) |
                  (static_cast<uint32_t>(byte(i + 1) & 0x3F) << 6) | (byte(i + 2) & 0x3F);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && is_cont(i + 1) && is_cont(i + 2) && is_cont(i + 3)) {
    uint32_t cp = (static_cast<uint32_t>(b0 & 0x07) << 18) |
                  (static_cast<uint32_t>(byte(i + 1) & 0x3F) << 12) |
                  (static_cast<uint32_t>(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
    i += 4;
    return cp;
  }
  ++i;
  return b0;  // Latin-1 fallback
}

inline void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space_cp(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

inline bool is_punct_cp(uint32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  // Latin-1 punctuation/symbols, general punctuation block, CJK brackets.
  return (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 ||
         (cp >= 0x2010 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3011);
}

// Simple case folding for ASCII and the common European ranges. Codepoints
// outside these ranges pass through unchanged.
inline uint32_t fold_case_cp(uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;  // Latin-1
  if (cp >= 0x100 && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;  // Latin Ext-A pairs
  if (cp == 0x178) return 0xFF;
  if (cp == 0x179 || cp == 0x17B || cp == 0x17D) return cp + 1;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;                 // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

}  // namespace detail

// Rule-based word tokenizer: case-fold, split on Unicode whitespace, strip
// leading/trailing punctuation from each token, drop punctuation-only tokens.
// Pure and deterministic; interior punctuation ("don't", "3.5") is kept.
inline TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::vector<uint32_t> word;
  auto flush = [&]() {
    if (word.empty()) return;
    size_t lo = 0, hi = word.size();
    while (lo < hi && detail::is_punct_cp(word[lo])) ++lo;
    while (hi > lo && detail::is_punct_cp(word[hi - 1])) --hi;
    if (lo < hi) {
      std::string tok;
      for (size_t k = lo; k < hi; ++k) detail::append_utf8(tok, word[k]);
      out.push_back(std::move(tok));
    }
    word.clear();
  };
  size_t i = 0;
  while (i < text.size()) {
    uint32_t cp = detail::next_codepoint(text, i);
    if (detail::is_space_cp(cp)) {
      flush();
    } else {
      word.push_back(detail::fold_case_cp(cp));
    }
  }
  flush();
  return out;
}

inline std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Token statistics over a candidate pool. Ids are dense in [0, size()) and
// assigned in lexicographic token order, so rebuilding from the same pool
// yields an identical vocabulary.
class Vocab {
 public:
  struct Entry {
    int32_t id = -1;
    uint64_t df = 0;
  };

  Vocab() = default;
  Vocab(std::vector<std::pair<std::string, uint64_t>> token_dfs, uint64_t total_docs)
      : total_docs_(total_docs) {
    std::sort(token_dfs.begin(), token_dfs.end());
    tokens_.reserve(token_dfs.size());
    for (auto& [tok, df] : token_dfs) {
      auto id = static_cast<int32_t>(tokens_.size());
      entries_.emplace(tok, Entry{id, df});
      tokens_.push_back(tok);
      dfs_.push_back(df);
    }
  }

  size_t size() const { return tokens_.size(); }
  uint64_t total_docs() const { return total_docs_; }

  // -1 for out-of-vocabulary tokens.
  int32_t id_of(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    return it == entries_.end() ? -1 : it->second.id;
  }

  uint64_t df_of(std::string_view token) const {
    auto it = entries_.find(std::string(token));
    return it == entries_.end() ? 0 : it->second.df;
  }

  const std::string& token_at(int32_t id) const { return tokens_.at(static_cast<size_t>(id)); }
  uint64_t df_at(int32_t id) const { return dfs_.at(static_cast<size_t>(id)); }

  // Robertson-style IDF with +1 smoothing inside the log, so the value stays
  // strictly positive even when df > N/2. Unknown tokens score at df = 0.
  double idf(std::string_view token) const { return idf_for_df(df_of(token)); }

  double idf_for_df(uint64_t df) const {
    double n = static_cast<double>(total_docs_);
    double d = static_cast<double>(df);
    return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
  }

  void save(std::ostream& os) const {
    os << "silverqa vocab 1\n";
    os << "total_docs " << total_docs_ << "\n";
    os << "size " << tokens_.size() << "\n";
    for (size_t i = 0; i < tokens_.size(); ++i) {
      os << tokens_[i] << "\t" << i << "\t" << dfs_[i] << "\n";
    }
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write vocab file: " + path);
    save(os);
  }

  static Vocab load(std::istream& is) {
    std::string header;
    std::getline(is, header);
    if (header != "silverqa vocab 1") throw DataError("bad vocab header: '" + header + "'");
    std::string key;
    uint64_t total_docs = 0, size = 0;
    is >> key >> total_docs;
    if (key != "total_docs") throw DataError("bad vocab field: expected total_docs");
    is >> key >> size;
    if (key != "size") throw DataError("bad vocab field: expected size");
    is.ignore();
    Vocab v;
    v.total_docs_ = total_docs;
    v.tokens_.reserve(size);
    for (uint64_t i = 0; i < size; ++i) {
      std::string line;
      if (!std::getline(is, line)) throw DataError("vocab file truncated");
      std::istringstream ls(line);
      std::string tok;
      int32_t id;
      uint64_t df;
      if (!(ls >> tok >> id >> df)) throw DataError("bad vocab record: '" + line + "'");
      if (id != static_cast<int32_t>(i)) throw DataError("vocab ids out of order");
      v.entries_.emplace(tok, Entry{id, df});
      v.tokens_.push_back(tok);
      v.dfs_.push_back(df);
    }
    return v;
  }

  static Vocab load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open vocab file: " + path);
    return load(is);
  }

  bool operator==(const Vocab& other) const {
    return total_docs_ == other.total_docs_ && tokens_ == other.tokens_ && dfs_ == other.dfs_;
  }

 private:
  std::unordered_map<std::string, Entry> entries_;
  std::vector<std::string> tokens_;
  std::vector<uint64_t> dfs_;
  uint64_t total_docs_ = 0;
};

// Counts document frequency over a sequence of documents, each given as its
// token sequence; a token counts at most once per document.
inline Vocab build_vocab_from_docs(const std::vector<TokenSeq>& docs, uint64_t min_df = 1) {
  if (docs.empty()) throw DataError("build_vocab: empty document collection");
  std::unordered_map<std::string, uint64_t> df;
  std::unordered_set<std::string> seen;
  for (const auto& doc : docs) {
    seen.clear();
    for (const auto& tok : doc) {
      if (seen.insert(tok).second) ++df[tok];
    }
  }
  std::vector<std::pair<std::string, uint64_t>> kept;
  kept.reserve(df.size());
  for (auto& [tok, d] : df) {
    if (d >= min_df) kept.emplace_back(tok, d);
  }
  return Vocab(std::move(kept), docs.size());
}

}  // namespace silverqa

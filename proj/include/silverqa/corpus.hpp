#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "silverqa/common.hpp"
#include "silverqa/rng.hpp"
#include "silverqa/textproc.hpp"

namespace silverqa {

struct Question {
  std::string id;
  std::string text;
};

// The unit of retrieval: an answer sentence with its surrounding context.
struct CandidateEntry {
  std::string id;
  std::string sentence;
  std::string context;  // may be empty
  std::string doc_id;
};

struct GoldPair {
  std::string question_id;
  std::string candidate_id;
};

// Training pair with the supervisor's probability and the loss weight.
// Gold pairs carry p = 1, w = 1; mined pairs carry w = p^alpha (alpha = 2
// by default).
struct WeightedPair {
  std::string question_id;
  std::string candidate_id;
  double p = 1.0;
  double w = 1.0;
  enum class Origin { gold, mined } origin = Origin::gold;
};

inline const char* origin_name(WeightedPair::Origin o) {
  return o == WeightedPair::Origin::gold ? "gold" : "mined";
}

class CandidatePool {
 public:
  CandidatePool() = default;

  // Duplicate ids are rejected; `line_of` carries source line numbers for
  // error messages when loading from a file (0 when built in memory).
  void add(CandidateEntry entry, size_t line = 0) {
    auto it = index_.find(entry.id);
    if (it != index_.end()) {
      throw DataError("duplicate candidate id '" + entry.id + "' (lines " +
                      std::to_string(line_of_[it->second]) + " and " + std::to_string(line) + ")");
    }
    if (entry.sentence.empty()) {
      throw DataError("candidate '" + entry.id + "' has an empty sentence (line " +
                      std::to_string(line) + ")");
    }
    index_.emplace(entry.id, entries_.size());
    line_of_.push_back(line);
    entries_.push_back(std::move(entry));
  }

  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<CandidateEntry>& entries() const { return entries_; }
  const CandidateEntry& at(size_t i) const { return entries_[i]; }

  bool contains(const std::string& id) const { return index_.count(id) > 0; }

  const CandidateEntry* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  std::optional<size_t> index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<CandidateEntry> entries_;
  std::vector<size_t> line_of_;
  std::unordered_map<std::string, size_t> index_;
};

struct DatasetSplit {
  std::vector<Question> questions;
  CandidatePool pool;
  std::vector<GoldPair> gold;

  const Question* find_question(const std::string& id) const {
    for (const auto& q : questions) {
      if (q.id == id) return &q;
    }
    return nullptr;
  }

  // Gold candidate ids per question, in gold-list order.
  std::unordered_map<std::string, std::vector<std::string>> gold_by_question() const {
    std::unordered_map<std::string, std::vector<std::string>> m;
    for (const auto& g : gold) m[g.question_id].push_back(g.candidate_id);
    return m;
  }

  void validate() const {
    std::unordered_set<std::string> qids;
    for (const auto& q : questions) {
      if (q.text.empty()) throw DataError("question '" + q.id + "' has empty text");
      if (!qids.insert(q.id).second) throw DataError("duplicate question id '" + q.id + "'");
    }
    std::unordered_set<std::string> seen_pairs;
    for (const auto& g : gold) {
      if (!qids.count(g.question_id)) {
        throw DataError("dangling gold reference: question id '" + g.question_id + "'");
      }
      if (!pool.contains(g.candidate_id)) {
        throw DataError("dangling gold reference: candidate id '" + g.candidate_id + "'");
      }
      if (!seen_pairs.insert(g.question_id + "\x1f" + g.candidate_id).second) {
        throw DataError("duplicate gold pair (" + g.question_id + ", " + g.candidate_id + ")");
      }
    }
  }
};

namespace detail {

inline nlohmann::json parse_record_line(const std::string& line, size_t line_no) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError("malformed record at line " + std::to_string(line_no));
  }
  return j;
}

inline std::string require_field(const nlohmann::json& j, const char* field, size_t line_no) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw DataError("line " + std::to_string(line_no) + ": missing or empty field '" + field +
                    "'");
  }
  return it->get<std::string>();
}

inline std::string optional_field(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace detail

// Pool file: one JSON record per line with fields `id`, `sentence`,
// `context` (optional), `doc_id`.
inline CandidatePool load_pool(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open pool file: " + path);
  CandidatePool pool;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = detail::parse_record_line(line, line_no);
    CandidateEntry e;
    e.id = detail::require_field(j, "id", line_no);
    e.sentence = detail::require_field(j, "sentence", line_no);
    e.context = detail::optional_field(j, "context");
    e.doc_id = detail::require_field(j, "doc_id", line_no);
    pool.add(std::move(e), line_no);
  }
  return pool;
}

// Pairs file: one JSON record per line with fields `id` (candidate id),
// `question`, `answer`, `context` (optional), `doc_id`, and optional
// `question_id`. When `question_id` is absent it defaults to `id`; repeating
// a `question_id` with identical question text attaches further gold answers
// to the same question. Repeating a candidate `id` is allowed only when the
// candidate content is identical (the same answer shared by two questions).
inline DatasetSplit load_pairs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open pairs file: " + path);
  DatasetSplit split;
  std::unordered_map<std::string, size_t> q_line;   // question id -> first line
  std::unordered_map<std::string, size_t> c_line;   // candidate id -> first line
  std::unordered_map<std::string, std::string> q_text;
  std::unordered_set<std::string> pair_keys;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto j = detail::parse_record_line(line, line_no);
    CandidateEntry cand;
    cand.id = detail::require_field(j, "id", line_no);
    cand.sentence = detail::require_field(j, "answer", line_no);
    cand.context = detail::optional_field(j, "context");
    cand.doc_id = detail::require_field(j, "doc_id", line_no);
    std::string question = detail::require_field(j, "question", line_no);
    std::string qid = detail::optional_field(j, "question_id");
    if (qid.empty()) qid = cand.id;

    auto qit = q_line.find(qid);
    if (qit == q_line.end()) {
      q_line.emplace(qid, line_no);
      q_text.emplace(qid, question);
      split.questions.push_back(Question{qid, question});
    } else if (q_text[qid] != question) {
      throw DataError("duplicate question id '" + qid + "' with differing text (lines " +
                      std::to_string(qit->second) + " and " + std::to_string(line_no) + ")");
    }

    auto cit = c_line.find(cand.id);
    if (cit == c_line.end()) {
      c_line.emplace(cand.id, line_no);
      split.pool.add(cand, line_no);
    } else {
      const CandidateEntry* prev = split.pool.find(cand.id);
      if (prev->sentence != cand.sentence || prev->context != cand.context ||
          prev->doc_id != cand.doc_id) {
        throw DataError("duplicate candidate id '" + cand.id + "' (lines " +
                        std::to_string(cit->second) + " and " + std::to_string(line_no) + ")");
      }
    }

    if (!pair_keys.insert(qid + "\x1f" + cand.id).second) {
      throw DataError("duplicate gold pair (" + qid + ", " + cand.id + ") at line " +
                      std::to_string(line_no));
    }
    split.gold.push_back(GoldPair{qid, cand.id});
  }
  split.validate();
  return split;
}

// Writes the pairs view of a split: one record per gold pair. Candidates not
// referenced by any gold pair are not part of this view; use save_pool for
// standalone pools.
inline void save_pairs(const DatasetSplit& split, std::ostream& os) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : split.questions) by_id[q.id] = &q;
  for (const auto& g : split.gold) {
    const CandidateEntry* c = split.pool.find(g.candidate_id);
    if (c == nullptr) throw DataError("dangling gold reference: candidate id '" + g.candidate_id + "'");
    nlohmann::json j;
    j["id"] = c->id;
    j["question_id"] = g.question_id;
    j["question"] = by_id.at(g.question_id)->text;
    j["answer"] = c->sentence;
    if (!c->context.empty()) j["context"] = c->context;
    j["doc_id"] = c->doc_id;
    os << j.dump() << "\n";
  }
}

inline void save_pairs_file(const DatasetSplit& split, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write pairs file: " + path);
  save_pairs(split, os);
}

inline void save_pool_file(const CandidatePool& pool, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write pool file: " + path);
  for (const auto& e : pool.entries()) {
    nlohmann::json j;
    j["id"] = e.id;
    j["sentence"] = e.sentence;
    if (!e.context.empty()) j["context"] = e.context;
    j["doc_id"] = e.doc_id;
    os << j.dump() << "\n";
  }
}

// Replaces the split's pool with an externally loaded one. Every gold
// candidate must resolve in the new pool.
inline DatasetSplit attach_pool(DatasetSplit split, CandidatePool pool) {
  for (const auto& g : split.gold) {
    if (!pool.contains(g.candidate_id)) {
      throw DataError("dangling gold reference: candidate id '" + g.candidate_id +
                      "' not present in attached pool");
    }
  }
  split.pool = std::move(pool);
  split.validate();
  return split;
}

// Partitions by question id so no question straddles the two splits. The dev
// side receives round-half-up(fraction * N) questions, drawn by a seeded
// shuffle. Both sides keep the full candidate pool.
inline std::pair<DatasetSplit, DatasetSplit> split_dev(const DatasetSplit& split, double fraction,
                                                       uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split_dev: fraction must lie in (0,1)");
  }
  if (split.questions.empty()) throw DataError("split_dev: empty split");

  std::vector<size_t> order(split.questions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "split_dev"));
  rng.shuffle(order);

  auto n_dev = static_cast<size_t>(
      std::floor(fraction * static_cast<double>(split.questions.size()) + 0.5));
  std::unordered_set<std::string> dev_ids;
  for (size_t i = 0; i < n_dev; ++i) dev_ids.insert(split.questions[order[i]].id);

  DatasetSplit train, dev;
  train.pool = split.pool;
  dev.pool = split.pool;
  for (const auto& q : split.questions) {
    (dev_ids.count(q.id) ? dev : train).questions.push_back(q);
  }
  for (const auto& g : split.gold) {
    (dev_ids.count(g.question_id) ? dev : train).gold.push_back(g);
  }
  return {std::move(train), std::move(dev)};
}

// All candidate sentences of the split, deduplicated by id (first occurrence
// wins); order follows the input pool.
inline CandidatePool sentence_pool(const DatasetSplit& split) {
  CandidatePool out;
  for (const auto& e : split.pool.entries()) {
    if (!out.contains(e.id)) out.add(e);
  }
  return out;
}

}  // namespace silverqa

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/pair_scorer.hpp"

namespace silverqa {

struct MineConfig {
  size_t k = 10;            // nearest neighbors mined per question
  double threshold = 0.5;   // keep mined pairs with supervisor score >= threshold
  double weight_exponent = 2.0;  // w = p^alpha
};

struct MiningReport {
  size_t questions_processed = 0;
  size_t candidates_retrieved = 0;
  size_t true_positives_removed = 0;
  size_t pairs_scored = 0;
  size_t pairs_kept = 0;
  size_t gold_pairs = 0;

  double kept_gold_ratio() const {
    return gold_pairs == 0 ? 0.0
                           : static_cast<double>(pairs_kept) / static_cast<double>(gold_pairs);
  }
};

struct MineResult {
  std::vector<WeightedPair> mined;
  MiningReport report;
};

// Supervised mining of weighted silver pairs: per question, retrieve the
// top-k nearest neighbors from the pool, drop pairs already in the gold set,
// score the survivors with the supervisor, and keep those at or above the
// threshold with weight p^alpha. Output ordered by (question_id,
// candidate_id).
inline MineResult mine(const DatasetSplit& train, const CandidatePool& pool,
                       const RetrieveFn& retrieve, const PairScoreFn& score_pair,
                       const MineConfig& cfg = {}) {
  if (cfg.k < 1) throw ConfigError("mine: k must be >= 1");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
    throw ConfigError("mine: threshold must lie in [0,1]");
  }
  if (pool.empty()) throw DataError("mine: empty pool");

  std::unordered_set<std::string> gold_keys;
  for (const auto& g : train.gold) gold_keys.insert(g.question_id + "\x1f" + g.candidate_id);

  MineResult res;
  res.report.gold_pairs = train.gold.size();
  for (const auto& q : train.questions) {
    ++res.report.questions_processed;
    for (const auto& sc : retrieve(q, cfg.k)) {
      ++res.report.candidates_retrieved;
      if (gold_keys.count(q.id + "\x1f" + sc.id)) {
        ++res.report.true_positives_removed;
        continue;
      }
      const CandidateEntry* c = pool.find(sc.id);
      if (c == nullptr) {
        throw DataError("mine: retrieved candidate '" + sc.id + "' not present in pool");
      }
      const double p = score_pair(q, *c);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw NumericError("mine: supervisor score outside [0,1] for (" + q.id + ", " + sc.id +
                           ")");
      }
      ++res.report.pairs_scored;
      if (p >= cfg.threshold && p > 0.0) {
        WeightedPair wp;
        wp.question_id = q.id;
        wp.candidate_id = sc.id;
        wp.p = p;
        wp.w = std::pow(p, cfg.weight_exponent);
        wp.origin = WeightedPair::Origin::mined;
        res.mined.push_back(std::move(wp));
        ++res.report.pairs_kept;
      }
    }
  }
  std::sort(res.mined.begin(), res.mined.end(), [](const WeightedPair& a, const WeightedPair& b) {
    if (a.question_id != b.question_id) return a.question_id < b.question_id;
    return a.candidate_id < b.candidate_id;
  });
  return res;
}

// Gold pairs mapped to (p=1, w=1) followed by mined pairs; a mined pair that
// duplicates a gold pair collapses to the gold entry.
inline std::vector<WeightedPair> merge(const std::vector<GoldPair>& gold,
                                       const std::vector<WeightedPair>& mined) {
  std::vector<WeightedPair> out;
  out.reserve(gold.size() + mined.size());
  std::unordered_set<std::string> keys;
  for (const auto& g : gold) {
    if (!keys.insert(g.question_id + "\x1f" + g.candidate_id).second) continue;
    WeightedPair wp;
    wp.question_id = g.question_id;
    wp.candidate_id = g.candidate_id;
    wp.p = 1.0;
    wp.w = 1.0;
    wp.origin = WeightedPair::Origin::gold;
    out.push_back(std::move(wp));
  }
  for (const auto& m : mined) {
    if (!keys.insert(m.question_id + "\x1f" + m.candidate_id).second) continue;
    out.push_back(m);
  }
  return out;
}

// Mined pairs file: one JSON record per line with fields question_id,
// candidate_id, p, w, origin.
inline void save_weighted_pairs(const std::vector<WeightedPair>& pairs, std::ostream& os) {
  for (const auto& p : pairs) {
    nlohmann::json j;
    j["question_id"] = p.question_id;
    j["candidate_id"] = p.candidate_id;
    j["p"] = p.p;
    j["w"] = p.w;
    j["origin"] = origin_name(p.origin);
    os << j.dump() << "\n";
  }
}

inline void save_weighted_pairs_file(const std::vector<WeightedPair>& pairs,
                                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write pairs file: " + path);
  save_weighted_pairs(pairs, os);
}

inline std::vector<WeightedPair> load_weighted_pairs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open weighted pairs file: " + path);
  std::vector<WeightedPair> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError("malformed weighted pair at line " + std::to_string(line_no));
    }
    WeightedPair p;
    try {
      p.question_id = j.at("question_id").get<std::string>();
      p.candidate_id = j.at("candidate_id").get<std::string>();
      p.p = j.at("p").get<double>();
      p.w = j.at("w").get<double>();
      const std::string origin = j.at("origin").get<std::string>();
      if (origin == "gold") {
        p.origin = WeightedPair::Origin::gold;
      } else if (origin == "mined") {
        p.origin = WeightedPair::Origin::mined;
      } else {
        throw DataError("unknown origin '" + origin + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad weighted pair at line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::string format_mining_report(const MiningReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "questions_processed %zu\n"
                "candidates_retrieved %zu\n"
                "true_positives_removed %zu\n"
                "pairs_scored %zu\n"
                "pairs_kept %zu\n"
                "gold_pairs %zu\n"
                "kept_gold_ratio %.4f\n",
                r.questions_processed, r.candidates_retrieved, r.true_positives_removed,
                r.pairs_scored, r.pairs_kept, r.gold_pairs, r.kept_gold_ratio());
  return buf;
}

// One-line summary in the style "+53.0% (56,148) more examples".
inline std::string format_mining_summary(const MiningReport& r) {
  std::string kept = std::to_string(r.pairs_kept);
  for (int i = static_cast<int>(kept.size()) - 3; i > 0; i -= 3) {
    kept.insert(static_cast<size_t>(i), ",");
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "mined +%.1f%% (%s) examples on top of %zu gold pairs",
                100.0 * r.kept_gold_ratio(), kept.c_str(), r.gold_pairs);
  return buf;
}

}  // namespace silverqa

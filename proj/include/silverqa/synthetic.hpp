#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/rng.hpp"

namespace silverqa {

// Entity-fact corpus generator for desk-scale experiments. Every entity
// contributes one gold QA pair about one of its attributes, a few distractor
// sentences about other attributes, and (at the unlabeled-positive rate) one
// restatement of the gold fact extended by an attribution tail ("... as
// records note") that is present in the pool but NOT linked to the question.
// The restatements are the ground truth the miner is expected to recover;
// they are listed in a hidden oracle so tests can measure mining precision
// and recall.
//
// Tails come from two disjoint lexicons. Annotated (train gold) answers use
// curated tails; the unannotated restatements in the pool and most test gold
// answers use wild tails. Tail presence is therefore uninformative for the
// pair classifier, whose overlap features cannot tell the lexicons apart,
// but wild-tail tokens never occur in the gold training pairs: a retriever
// trained only on gold annotations meets them at test time as unknown noise,
// while one trained on the mined restatements has seen them as answer
// phrasing.
struct SyntheticSpec {
  size_t entities = 1000;          // train entities (one question each)
  size_t test_entities = 0;        // 0 means entities / 5
  int paraphrase_templates = 3;    // wild attribution tails in use (1..5)
  double unlabeled_positive_rate = 0.5;
  size_t vocab_size = 200;         // filler lexicon for contexts
  uint64_t seed = 7;

  size_t effective_test_entities() const {
    return test_entities > 0 ? test_entities : std::max<size_t>(1, entities / 5);
  }
};

struct SyntheticCorpus {
  DatasetSplit train;              // pool = full train pool (golds, distractors, paraphrases)
  DatasetSplit test;               // pool = test golds + distractors, canonical distractors
  std::vector<GoldPair> mining_oracle;  // true unlabeled positives in the train pool
};

namespace detail {

inline const std::array<const char*, 12>& synth_attributes() {
  static const std::array<const char*, 12> a = {"color",    "size",   "shape", "origin",
                                                "material", "sound",  "habitat", "diet",
                                                "age",      "speed",  "weight",  "mood"};
  return a;
}

inline const std::array<std::array<const char*, 6>, 12>& synth_values() {
  static const std::array<std::array<const char*, 6>, 12> v = {{
      {"crimson", "azure", "emerald", "ivory", "violet", "amber"},
      {"tiny", "small", "medium", "large", "huge", "giant"},
      {"round", "square", "oval", "spiral", "flat", "jagged"},
      {"northern", "southern", "eastern", "western", "coastal", "inland"},
      {"stone", "timber", "copper", "glass", "wool", "clay"},
      {"humming", "rattling", "whistling", "droning", "chirping", "rumbling"},
      {"forest", "desert", "tundra", "marsh", "prairie", "reef"},
      {"grain", "nectar", "roots", "plankton", "berries", "moss"},
      {"ancient", "old", "mature", "young", "newborn", "timeless"},
      {"sluggish", "slow", "steady", "brisk", "swift", "blazing"},
      {"feather", "light", "middling", "heavy", "massive", "crushing"},
      {"calm", "cheerful", "wary", "gloomy", "fierce", "playful"},
  }};
  return v;
}

// Tails appended to unannotated restatements and most test gold answers.
// Their tokens appear nowhere else in the corpus.
inline const std::array<const char*, 5>& synth_wild_tails() {
  static const std::array<const char*, 5> t = {"as records note", "by common account",
                                               "so stories tell", "per field reports",
                                               "in plain truth"};
  return t;
}

// Tails appended to annotated (train gold) answers; disjoint from the wild
// lexicon so a gold-only retriever never trains on wild-tail tokens.
inline const std::array<const char*, 3>& synth_curated_tails() {
  static const std::array<const char*, 3> t = {"as locals claim", "under close study",
                                               "from early surveys"};
  return t;
}

// Deterministic pseudo-name from an index: base-20 over a syllable alphabet.
inline std::string synth_name(size_t index, const std::array<const char*, 20>& syllables,
                              size_t min_syllables) {
  std::string name;
  size_t rest = index;
  size_t digits = 0;
  do {
    name += syllables[rest % syllables.size()];
    rest /= syllables.size();
    ++digits;
  } while (rest > 0);
  for (size_t i = digits; i < min_syllables; ++i) name += syllables[0];
  return name;
}

inline std::string entity_name(size_t index) {
  static const std::array<const char*, 20> syl = {"zor", "mel", "dra", "fin", "gus",
                                                  "kel", "lun", "nor", "pim", "rav",
                                                  "sol", "tur", "vex", "wim", "yal",
                                                  "bro", "cru", "dol", "fra", "gli"};
  return synth_name(index, syl, 2);
}

inline std::string filler_word(size_t index) {
  static const std::array<const char*, 20> syl = {"al", "ben", "cor", "dun", "el",
                                                  "far", "gol", "hin", "ir",  "jas",
                                                  "tam", "lum", "mor", "nel", "ost",
                                                  "pur", "quin", "rol", "sten", "ul"};
  return synth_name(index, syl, 3);
}

}  // namespace detail

inline void validate(const SyntheticSpec& spec) {
  if (spec.entities < 1) throw ConfigError("gen-synthetic: entities must be >= 1");
  if (spec.paraphrase_templates < 1 ||
      spec.paraphrase_templates > static_cast<int>(detail::synth_wild_tails().size())) {
    throw ConfigError("gen-synthetic: paraphrase_templates must lie in [1,5]");
  }
  if (!(spec.unlabeled_positive_rate >= 0.0 && spec.unlabeled_positive_rate <= 1.0)) {
    throw ConfigError("gen-synthetic: unlabeled_positive_rate must lie in [0,1]");
  }
  if (spec.vocab_size < 2) throw ConfigError("gen-synthetic: vocab_size must be >= 2");
}

inline SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  const auto& attrs = detail::synth_attributes();
  const auto& values = detail::synth_values();
  const auto& wild = detail::synth_wild_tails();
  const auto& curated = detail::synth_curated_tails();
  const auto n_wild = static_cast<uint64_t>(spec.paraphrase_templates);
  constexpr size_t kDistractors = 3;

  Rng rng(derive_seed(spec.seed, "gen_synthetic"));
  SyntheticCorpus corpus;

  auto fact_sentence = [&](const std::string& entity, size_t attr, size_t value) {
    return std::string(attrs[attr]) + " of " + entity + " is " + values[attr][value];
  };
  auto make_context = [&](const std::string& entity) {
    return "notes on " + entity + " " + detail::filler_word(rng.below(spec.vocab_size)) + " " +
           detail::filler_word(rng.below(spec.vocab_size));
  };

  auto gen_entity = [&](DatasetSplit& split, size_t index, bool is_test) {
    const std::string name = detail::entity_name(index);
    const std::string doc_id = "d-" + name;
    const std::string qid = "q-" + name;

    const size_t attr = rng.below(attrs.size());
    const size_t value = rng.below(6);
    // both splits mix bare and tailed gold answers in the same proportion;
    // only the tail lexicon differs (curated for train, wild for test)
    const uint64_t n_gold_tails = is_test ? n_wild : curated.size();
    const uint64_t gold_form = rng.below(n_gold_tails + 1);

    split.questions.push_back(
        Question{qid, "what is the " + std::string(attrs[attr]) + " of " + name});

    CandidateEntry gold;
    gold.id = "c-" + name + "-gold";
    gold.sentence = fact_sentence(name, attr, value);
    if (gold_form > 0) {
      gold.sentence +=
          std::string(" ") + (is_test ? wild[gold_form - 1] : curated[gold_form - 1]);
    }
    gold.context = make_context(name);
    gold.doc_id = doc_id;
    split.pool.add(gold);
    split.gold.push_back(GoldPair{qid, gold.id});

    // distractor facts about other attributes, always bare
    std::vector<size_t> other_attrs;
    for (size_t a = 0; a < attrs.size(); ++a) {
      if (a != attr) other_attrs.push_back(a);
    }
    for (size_t k = 0; k < kDistractors; ++k) {
      const size_t pick = rng.below(other_attrs.size());
      const size_t d_attr = other_attrs[pick];
      other_attrs.erase(other_attrs.begin() + static_cast<std::ptrdiff_t>(pick));
      CandidateEntry d;
      d.id = "c-" + name + "-x" + std::to_string(k);
      d.sentence = fact_sentence(name, d_attr, rng.below(6));
      d.context = make_context(name);
      d.doc_id = doc_id;
      split.pool.add(d);
    }

    // unlabeled positive: the gold fact restated with a wild tail, present
    // in the train pool but not linked to the question
    if (!is_test && rng.bernoulli(spec.unlabeled_positive_rate)) {
      CandidateEntry alt;
      alt.id = "c-" + name + "-alt";
      alt.sentence = fact_sentence(name, attr, value) + " " + wild[rng.below(n_wild)];
      alt.context = make_context(name);
      alt.doc_id = doc_id;
      split.pool.add(alt);
      corpus.mining_oracle.push_back(GoldPair{qid, alt.id});
    }
  };

  for (size_t i = 0; i < spec.entities; ++i) gen_entity(corpus.train, i, false);
  const size_t n_test = spec.effective_test_entities();
  for (size_t j = 0; j < n_test; ++j) gen_entity(corpus.test, spec.entities + j, true);

  corpus.train.validate();
  corpus.test.validate();
  return corpus;
}

struct SyntheticPaths {
  std::string train_pairs;
  std::string train_pool;
  std::string test_pairs;
  std::string test_pool;
  std::string oracle;
};

inline void save_oracle_file(const std::vector<GoldPair>& oracle, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write oracle file: " + path);
  for (const auto& g : oracle) {
    nlohmann::json j;
    j["question_id"] = g.question_id;
    j["candidate_id"] = g.candidate_id;
    os << j.dump() << "\n";
  }
}

inline std::vector<GoldPair> load_oracle_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open oracle file: " + path);
  std::vector<GoldPair> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError("malformed oracle record at line " + std::to_string(line_no));
    }
    out.push_back(GoldPair{j.at("question_id").get<std::string>(),
                           j.at("candidate_id").get<std::string>()});
  }
  return out;
}

inline void save_synthetic(const SyntheticCorpus& corpus, const SyntheticPaths& paths) {
  save_pairs_file(corpus.train, paths.train_pairs);
  save_pool_file(corpus.train.pool, paths.train_pool);
  save_pairs_file(corpus.test, paths.test_pairs);
  save_pool_file(corpus.test.pool, paths.test_pool);
  save_oracle_file(corpus.mining_oracle, paths.oracle);
}

}  // namespace silverqa

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/dense_encoder.hpp"
#include "silverqa/rng.hpp"
#include "silverqa/sparse_index.hpp"
#include "silverqa/textproc.hpp"

namespace silverqa {

// Binary classification instance for question-answer relatedness.
struct LabeledPair {
  enum class Source { gold, bm25_neg, dense_neg, indoc_neg };
  std::string question_id;
  std::string candidate_id;
  int label = 0;  // gold => 1, sampled negatives => 0
  Source source = Source::gold;
};

inline const char* source_name(LabeledPair::Source s) {
  switch (s) {
    case LabeledPair::Source::gold: return "gold";
    case LabeledPair::Source::bm25_neg: return "bm25_neg";
    case LabeledPair::Source::dense_neg: return "dense_neg";
    case LabeledPair::Source::indoc_neg: return "indoc_neg";
  }
  return "?";
}

// Retrieval interface shared by negative sampling and mining; backed by the
// dense dual encoder here, substitutable by any nearest-neighbor source.
using RetrieveFn = std::function<std::vector<ScoredCandidate>(const Question&, size_t)>;

// The returned closure borrows model, vocab, and pool embeddings; keep them
// alive for its lifetime.
inline RetrieveFn make_dense_retriever(const EncoderModel& model, const Vocab& vocab,
                                       const PoolEmbeddings& pool) {
  return [&model, &vocab, &pool](const Question& q, size_t k) {
    EmbeddingVec qv = encode_question(model, vocab, tokenize(q.text));
    return dense_top_k(qv, pool, k, static_cast<double>(model.scale));
  };
}

struct NegativeSamplingConfig {
  int per_strategy = 1;  // negatives per question per strategy (1:1:1 ratio)
  size_t neighbors = 10;
  uint64_t seed = 1;
};

struct NegativeSamplingStats {
  size_t bm25_skipped = 0;
  size_t dense_skipped = 0;
  size_t indoc_skipped = 0;
};

// Three negative strategies per question, 1:1:1 ratio:
//   1. a sample from the BM25 10-nearest-neighbor list,
//   2. a sample from the dense retriever's 10 nearest neighbors,
//   3. a candidate sampled from the question's supporting documents.
// Gold candidates of the question are never sampled; a strategy whose
// candidate set is empty contributes nothing for that question (logged).
inline std::vector<LabeledPair> sample_negatives(const DatasetSplit& split, const Bm25Index& bm25,
                                                 const RetrieveFn& dense,
                                                 const NegativeSamplingConfig& cfg = {},
                                                 NegativeSamplingStats* stats = nullptr,
                                                 std::ostream* log = nullptr) {
  auto gold_by_q = split.gold_by_question();
  std::unordered_map<std::string, std::vector<std::string>> by_doc;
  for (const auto& e : split.pool.entries()) by_doc[e.doc_id].push_back(e.id);

  Rng rng(derive_seed(cfg.seed, "sample_negatives"));
  std::vector<LabeledPair> out;
  NegativeSamplingStats local;
  NegativeSamplingStats& st = stats ? *stats : local;

  auto pick = [&](std::vector<std::string>& cands, const std::string& qid,
                  LabeledPair::Source src, size_t& skipped) {
    if (cands.empty()) {
      ++skipped;
      if (log) {
        *log << "sample_negatives: no " << source_name(src) << " candidates for question '"
             << qid << "'\n";
      }
      return;
    }
    const int n = std::min<int>(cfg.per_strategy, static_cast<int>(cands.size()));
    for (int i = 0; i < n; ++i) {
      size_t j = static_cast<size_t>(rng.below(cands.size()));
      out.push_back(LabeledPair{qid, cands[j], 0, src});
      cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(j));
    }
  };

  for (const auto& q : split.questions) {
    const auto git = gold_by_q.find(q.id);
    std::unordered_set<std::string> gold_ids;
    if (git != gold_by_q.end()) gold_ids.insert(git->second.begin(), git->second.end());

    auto not_gold = [&](const std::string& cid) { return gold_ids.count(cid) == 0; };

    std::vector<std::string> bm25_cands;
    for (const auto& sc : bm25.top_k(tokenize(q.text), cfg.neighbors)) {
      if (not_gold(sc.id)) bm25_cands.push_back(sc.id);
    }
    pick(bm25_cands, q.id, LabeledPair::Source::bm25_neg, st.bm25_skipped);

    std::vector<std::string> dense_cands;
    for (const auto& sc : dense(q, cfg.neighbors)) {
      if (not_gold(sc.id)) dense_cands.push_back(sc.id);
    }
    pick(dense_cands, q.id, LabeledPair::Source::dense_neg, st.dense_skipped);

    std::vector<std::string> indoc_cands;
    if (git != gold_by_q.end()) {
      std::set<std::string> docs;
      for (const auto& cid : git->second) {
        if (const CandidateEntry* c = split.pool.find(cid)) docs.insert(c->doc_id);
      }
      for (const auto& doc : docs) {
        for (const auto& cid : by_doc[doc]) {
          if (not_gold(cid)) indoc_cands.push_back(cid);
        }
      }
    }
    pick(indoc_cands, q.id, LabeledPair::Source::indoc_neg, st.indoc_skipped);
  }
  return out;
}

// Gold positives plus sampled negatives, in a stable order.
inline std::vector<LabeledPair> build_classifier_dataset(const DatasetSplit& split,
                                                         std::vector<LabeledPair> negatives) {
  std::vector<LabeledPair> out;
  out.reserve(split.gold.size() + negatives.size());
  for (const auto& g : split.gold) {
    out.push_back(LabeledPair{g.question_id, g.candidate_id, 1, LabeledPair::Source::gold});
  }
  out.insert(out.end(), std::make_move_iterator(negatives.begin()),
             std::make_move_iterator(negatives.end()));
  return out;
}

// Joint features of a question-candidate pair. These are functions of both
// texts at once, standing in for cross-attention's pair-level interactions.
constexpr size_t kNumPairFeatures = 11;
using PairFeatures = std::array<double, kNumPairFeatures>;

inline const std::array<const char*, kNumPairFeatures>& pair_feature_names() {
  static const std::array<const char*, kNumPairFeatures> names = {
      "overlap_count",   "idf_overlap", "jaccard",       "bigram_overlap",
      "question_cover",  "max_idf",     "bm25",          "log_len_ratio",
      "question_length", "cand_length", "bias",
  };
  return names;
}

inline PairFeatures extract_features(const Question& q, const CandidateEntry& c,
                                     const Bm25Index& bm25, const Vocab& vocab) {
  const TokenSeq q_toks = tokenize(q.text);
  const TokenSeq c_toks = candidate_tokens(c);

  std::set<std::string> q_set(q_toks.begin(), q_toks.end());
  std::set<std::string> c_set(c_toks.begin(), c_toks.end());
  std::vector<std::string> shared;
  std::set_intersection(q_set.begin(), q_set.end(), c_set.begin(), c_set.end(),
                        std::back_inserter(shared));

  double idf_overlap = 0.0, max_idf = 0.0;
  for (const auto& t : shared) {
    const double v = vocab.idf(t);
    idf_overlap += v;
    max_idf = std::max(max_idf, v);
  }

  const size_t uni = q_set.size() + c_set.size() - shared.size();
  const double jaccard = uni == 0 ? 0.0 : static_cast<double>(shared.size()) / uni;
  const double cover =
      q_set.empty() ? 0.0 : static_cast<double>(shared.size()) / q_set.size();

  auto bigrams = [](const TokenSeq& toks) {
    std::set<std::string> out;
    for (size_t i = 0; i + 1 < toks.size(); ++i) out.insert(toks[i] + "\x1f" + toks[i + 1]);
    return out;
  };
  const auto qb = bigrams(q_toks);
  const auto cb = bigrams(c_toks);
  size_t bigram_overlap = 0;
  for (const auto& bg : qb) bigram_overlap += cb.count(bg);

  PairFeatures f;
  f[0] = static_cast<double>(shared.size());
  f[1] = idf_overlap;
  f[2] = jaccard;
  f[3] = static_cast<double>(bigram_overlap);
  f[4] = cover;
  f[5] = max_idf;
  f[6] = bm25.score(q_toks, c.id);
  f[7] = std::log((1.0 + static_cast<double>(q_toks.size())) /
                  (1.0 + static_cast<double>(c_toks.size())));
  f[8] = static_cast<double>(q_toks.size());
  f[9] = static_cast<double>(c_toks.size());
  f[10] = 1.0;  // bias passes through standardization unchanged
  return f;
}

inline double sigmoid(double z) {
  z = std::clamp(z, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

// Logistic model over standardized pair features. Features with zero
// variance are frozen at 0 by the standardizer; the bias feature bypasses
// standardization so its weight acts as the intercept.
class PairClassifier {
 public:
  PairClassifier() = default;
  PairClassifier(std::vector<double> weights, std::vector<double> means, std::vector<double> stds)
      : weights_(std::move(weights)), means_(std::move(means)), stds_(std::move(stds)) {}

  const std::vector<double>& weights() const { return weights_; }

  double standardized(size_t i, double x) const {
    if (i == kNumPairFeatures - 1) return x;  // bias
    if (stds_[i] <= 1e-12) return 0.0;        // zero-variance feature, frozen
    return (x - means_[i]) / stds_[i];
  }

  double logit(const PairFeatures& f) const {
    double z = 0.0;
    for (size_t i = 0; i < kNumPairFeatures; ++i) z += weights_[i] * standardized(i, f[i]);
    return z;
  }

  double proba(const PairFeatures& f) const { return sigmoid(logit(f)); }

  void save(std::ostream& os) const {
    os << "silverqa classifier 1\n";
    os << "features " << kNumPairFeatures << "\n";
    char buf[128];
    for (size_t i = 0; i < kNumPairFeatures; ++i) {
      std::snprintf(buf, sizeof(buf), "%s\t%.17g\t%.17g\t%.17g\n", pair_feature_names()[i],
                    means_[i], stds_[i], weights_[i]);
      os << buf;
    }
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write classifier checkpoint: " + path);
    save(os);
  }

  static PairClassifier load(std::istream& is) {
    std::string header;
    std::getline(is, header);
    if (header != "silverqa classifier 1") {
      throw DataError("bad classifier header: '" + header + "'");
    }
    std::string key;
    size_t n = 0;
    is >> key >> n;
    if (key != "features" || n != kNumPairFeatures) {
      throw DataError("bad classifier feature count");
    }
    PairClassifier clf;
    clf.weights_.resize(n);
    clf.means_.resize(n);
    clf.stds_.resize(n);
    for (size_t i = 0; i < n; ++i) {
      std::string name;
      is >> name >> clf.means_[i] >> clf.stds_[i] >> clf.weights_[i];
      if (!is) throw DataError("classifier checkpoint truncated");
      if (name != pair_feature_names()[i]) {
        throw DataError("classifier feature order mismatch: '" + name + "'");
      }
    }
    return clf;
  }

  static PairClassifier load_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open classifier checkpoint: " + path);
    return load(is);
  }

 private:
  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> stds_;
};

struct ScorerConfig {
  double lr = 0.25;
  int epochs = 200;  // full-batch gradient steps
  double l2 = 1e-3;
  uint64_t seed = 1;  // training is exactly deterministic; kept for interface parity
  std::function<void(int epoch, double loss)> on_epoch;
};

// Full-batch gradient descent on the l2-penalized logistic loss over
// standardized features. Weights start at zero, so the initial prediction is
// p = 0.5 everywhere.
inline PairClassifier train_classifier(const std::vector<PairFeatures>& features,
                                       const std::vector<int>& labels, const ScorerConfig& cfg) {
  if (features.size() != labels.size() || features.empty()) {
    throw DataError("train_classifier: empty or mismatched training data");
  }
  const size_t n = features.size();
  size_t pos = 0;
  for (int y : labels) pos += static_cast<size_t>(y);
  if (pos == 0 || pos == n) throw DataError("train_classifier: single-class data");

  std::vector<double> means(kNumPairFeatures, 0.0), stds(kNumPairFeatures, 0.0);
  for (size_t i = 0; i + 1 < kNumPairFeatures; ++i) {
    double sum = 0.0;
    for (const auto& f : features) sum += f[i];
    means[i] = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto& f : features) sq += (f[i] - means[i]) * (f[i] - means[i]);
    stds[i] = std::sqrt(sq / static_cast<double>(n));
  }
  means[kNumPairFeatures - 1] = 0.0;
  stds[kNumPairFeatures - 1] = 1.0;

  PairClassifier clf(std::vector<double>(kNumPairFeatures, 0.0), means, stds);
  std::vector<std::array<double, kNumPairFeatures>> z(n);
  for (size_t r = 0; r < n; ++r) {
    for (size_t i = 0; i < kNumPairFeatures; ++i) z[r][i] = clf.standardized(i, features[r][i]);
  }

  std::vector<double> w(kNumPairFeatures, 0.0);
  std::vector<double> grad(kNumPairFeatures);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (size_t r = 0; r < n; ++r) {
      double logit = 0.0;
      for (size_t i = 0; i < kNumPairFeatures; ++i) logit += w[i] * z[r][i];
      const double p = sigmoid(logit);
      const double err = p - static_cast<double>(labels[r]);
      for (size_t i = 0; i < kNumPairFeatures; ++i) grad[i] += err * z[r][i];
      loss -= labels[r] ? std::log(std::max(p, 1e-15)) : std::log(std::max(1.0 - p, 1e-15));
    }
    double penalty = 0.0;
    for (size_t i = 0; i + 1 < kNumPairFeatures; ++i) penalty += w[i] * w[i];
    loss = loss / static_cast<double>(n) + 0.5 * cfg.l2 * penalty;
    for (size_t i = 0; i < kNumPairFeatures; ++i) {
      double g = grad[i] / static_cast<double>(n);
      if (i + 1 < kNumPairFeatures) g += cfg.l2 * w[i];  // intercept unpenalized
      w[i] -= cfg.lr * g;
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, loss);
    if (!std::isfinite(loss)) throw NumericError("classifier training diverged");
  }
  return PairClassifier(std::move(w), std::move(means), std::move(stds));
}

inline double predict_proba(const PairClassifier& clf, const Question& q,
                            const CandidateEntry& c, const Bm25Index& bm25, const Vocab& vocab) {
  return clf.proba(extract_features(q, c, bm25, vocab));
}

// Supervisor interface consumed by the miner: probability that the candidate
// answers the question.
using PairScoreFn = std::function<double(const Question&, const CandidateEntry&)>;

// Borrows classifier, index, and vocab; keep them alive for the closure's
// lifetime.
inline PairScoreFn make_pair_scorer(const PairClassifier& clf, const Bm25Index& bm25,
                                    const Vocab& vocab) {
  return [&clf, &bm25, &vocab](const Question& q, const CandidateEntry& c) {
    return predict_proba(clf, q, c, bm25, vocab);
  };
}

// Average precision: the step-wise area under the precision-recall sweep in
// descending score order. Tied scores form one step.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw DataError("average_precision: empty or mismatched inputs");
  }
  size_t total_pos = 0;
  for (int y : labels) total_pos += static_cast<size_t>(y);
  if (total_pos == 0) return 0.0;

  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  double ap = 0.0, prev_recall = 0.0;
  size_t tp = 0, seen = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    size_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_pos += static_cast<size_t>(labels[order[j]]);
      ++j;
    }
    tp += group_pos;
    seen += j - i;
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

struct ClassifierMetrics {
  double acc = 0.0;
  double auc_pr = 0.0;
};

inline ClassifierMetrics eval_classifier(const PairClassifier& clf,
                                         const std::vector<PairFeatures>& features,
                                         const std::vector<int>& labels) {
  if (features.empty() || features.size() != labels.size()) {
    throw DataError("eval_classifier: empty or mismatched test data");
  }
  std::vector<double> probs(features.size());
  size_t correct = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    probs[i] = clf.proba(features[i]);
    const int pred = probs[i] >= 0.5 ? 1 : 0;
    correct += static_cast<size_t>(pred == labels[i]);
  }
  ClassifierMetrics m;
  m.acc = static_cast<double>(correct) / static_cast<double>(features.size());
  m.auc_pr = average_precision(probs, labels);
  return m;
}

// The majority baseline always predicts "not related".
inline double majority_baseline_acc(const std::vector<int>& labels) {
  if (labels.empty()) throw DataError("majority_baseline_acc: empty labels");
  size_t neg = 0;
  for (int y : labels) neg += static_cast<size_t>(y == 0);
  return static_cast<double>(neg) / static_cast<double>(labels.size());
}

// Resolves labeled pairs to feature vectors against a split and its index.
inline void featurize(const DatasetSplit& split, const std::vector<LabeledPair>& pairs,
                      const Bm25Index& bm25, const Vocab& vocab,
                      std::vector<PairFeatures>& features, std::vector<int>& labels) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : split.questions) by_id[q.id] = &q;
  features.clear();
  labels.clear();
  features.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto qit = by_id.find(p.question_id);
    if (qit == by_id.end()) {
      throw DataError("labeled pair references unknown question id '" + p.question_id + "'");
    }
    const CandidateEntry* c = split.pool.find(p.candidate_id);
    if (c == nullptr) {
      throw DataError("labeled pair references unknown candidate id '" + p.candidate_id + "'");
    }
    features.push_back(extract_features(*qit->second, *c, bm25, vocab));
    labels.push_back(p.label);
  }
}

}  // namespace silverqa

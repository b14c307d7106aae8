#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "silverqa/common.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/rng.hpp"
#include "silverqa/sparse_index.hpp"
#include "silverqa/textproc.hpp"

namespace silverqa {

// Late-fusion retriever: a shared bag-of-embeddings encoder with input-type
// embeddings (question vs answer) and segment embeddings (answer sentence vs
// context). Questions and answers are encoded independently and combined
// only by the final dot product.
struct EncoderConfig {
  int32_t dim = 64;
  int32_t hash_buckets = 4096;  // OOV tokens hash here via FNV-1a
  uint64_t seed = 1;
  double scale_init = 10.0;
};

struct EncoderModel {
  int32_t dim = 0;
  int64_t vocab_size = 0;
  int32_t hash_buckets = 0;
  std::vector<float> token_emb;  // (vocab_size + hash_buckets) x dim, row-major
  std::vector<float> type_emb;   // 2 x dim; row 0 = question, row 1 = answer
  std::vector<float> seg_emb;    // 2 x dim; row 0 = answer sentence, row 1 = context
  float scale = 10.0f;           // positive softmax temperature, trained

  int64_t rows() const { return vocab_size + hash_buckets; }
};

using EmbeddingVec = std::vector<double>;  // unit Euclidean norm

inline EncoderModel init_model(const Vocab& vocab, const EncoderConfig& cfg) {
  if (cfg.dim < 2) throw ConfigError("init_model: dim must be >= 2");
  if (cfg.hash_buckets < 1) throw ConfigError("init_model: hash_buckets must be >= 1");
  if (!(cfg.scale_init > 0.0)) throw ConfigError("init_model: scale_init must be > 0");
  EncoderModel m;
  m.dim = cfg.dim;
  m.vocab_size = static_cast<int64_t>(vocab.size());
  m.hash_buckets = cfg.hash_buckets;
  Rng rng(derive_seed(cfg.seed, "init_model"));
  auto fill = [&](std::vector<float>& v, size_t n) {
    v.resize(n);
    for (auto& x : v) x = static_cast<float>(-0.05 + 0.1 * rng.open_unit());
  };
  fill(m.token_emb, static_cast<size_t>(m.rows()) * static_cast<size_t>(m.dim));
  fill(m.type_emb, 2 * static_cast<size_t>(m.dim));
  fill(m.seg_emb, 2 * static_cast<size_t>(m.dim));
  m.scale = static_cast<float>(cfg.scale_init);
  return m;
}

// Embedding row for a token: vocabulary id when known, otherwise one of the
// fixed OOV hash buckets.
inline int64_t token_row(const Vocab& vocab, int32_t hash_buckets, std::string_view token) {
  int32_t id = vocab.id_of(token);
  if (id >= 0) return id;
  return static_cast<int64_t>(vocab.size()) +
         static_cast<int64_t>(fnv1a64(token) % static_cast<uint64_t>(hash_buckets));
}

inline std::vector<int64_t> token_rows(const Vocab& vocab, int32_t hash_buckets,
                                       const TokenSeq& tokens) {
  std::vector<int64_t> rows;
  rows.reserve(tokens.size());
  for (const auto& t : tokens) rows.push_back(token_row(vocab, hash_buckets, t));
  return rows;
}

namespace detail {

// Pre-normalization encoding plus the cached norm, kept for backprop.
struct RawEncoding {
  std::vector<double> unit;  // u / max(norm, tiny)
  double norm = 0.0;
};

constexpr double kNormFloor = 1e-30;
constexpr int kTypeQuestion = 0;
constexpr int kTypeAnswer = 1;
constexpr int kSegSentence = 0;
constexpr int kSegContext = 1;

// Segment offsets apply only to answer inputs; question tokens carry no
// segment (pass kSegNone).
constexpr int kSegNone = -1;

inline RawEncoding encode_raw(const EncoderModel& m, std::span<const int64_t> first_rows,
                              std::span<const int64_t> second_rows, int first_seg,
                              int second_seg, int type) {
  const int d = m.dim;
  std::vector<double> u(static_cast<size_t>(d), 0.0);
  const size_t total = first_rows.size() + second_rows.size();
  if (total > 0) {
    auto accumulate = [&](std::span<const int64_t> rows, int seg) {
      const float* s = seg == kSegNone ? nullptr : &m.seg_emb[static_cast<size_t>(seg) * d];
      for (int64_t row : rows) {
        const float* e = &m.token_emb[static_cast<size_t>(row) * d];
        for (int k = 0; k < d; ++k) {
          u[k] += static_cast<double>(e[k]) + (s ? static_cast<double>(s[k]) : 0.0);
        }
      }
    };
    accumulate(first_rows, first_seg);
    accumulate(second_rows, second_seg);
    const double inv = 1.0 / static_cast<double>(total);
    for (int k = 0; k < d; ++k) u[k] *= inv;
  }
  const float* ty = &m.type_emb[type * d];
  for (int k = 0; k < d; ++k) u[k] += static_cast<double>(ty[k]);

  double sq = 0.0;
  for (int k = 0; k < d; ++k) sq += u[k] * u[k];
  RawEncoding enc;
  enc.norm = std::max(std::sqrt(sq), kNormFloor);
  enc.unit.resize(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) enc.unit[k] = u[k] / enc.norm;
  return enc;
}

}  // namespace detail

// Question encoding: mean of token embeddings plus the question type
// embedding, l2 normalized. An empty token list encodes the type embedding
// alone. Bag semantics: token order does not matter.
inline EmbeddingVec encode_question_rows(const EncoderModel& m, std::span<const int64_t> rows) {
  return detail::encode_raw(m, rows, {}, detail::kSegNone, detail::kSegNone,
                            detail::kTypeQuestion)
      .unit;
}

// Answer encoding: sentence and context tokens are combined in one mean,
// each offset by its segment embedding, plus the answer type embedding.
inline EmbeddingVec encode_answer_rows(const EncoderModel& m, std::span<const int64_t> sentence,
                                       std::span<const int64_t> context) {
  return detail::encode_raw(m, sentence, context, detail::kSegSentence, detail::kSegContext,
                            detail::kTypeAnswer)
      .unit;
}

inline EmbeddingVec encode_question(const EncoderModel& m, const Vocab& vocab,
                                    const TokenSeq& tokens) {
  return encode_question_rows(m, token_rows(vocab, m.hash_buckets, tokens));
}

inline EmbeddingVec encode_answer(const EncoderModel& m, const Vocab& vocab,
                                  const TokenSeq& sentence, const TokenSeq& context) {
  auto s = token_rows(vocab, m.hash_buckets, sentence);
  auto c = token_rows(vocab, m.hash_buckets, context);
  return encode_answer_rows(m, s, c);
}

inline double dot(const EmbeddingVec& a, const EmbeddingVec& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Pair score: scale * <q, a>, range [-scale, scale] for unit vectors.
inline double score(const EmbeddingVec& q, const EmbeddingVec& a, double scale) {
  return scale * dot(q, a);
}

// One training example, pre-resolved to embedding rows.
struct TrainExample {
  std::vector<int64_t> question_rows;
  std::vector<int64_t> sentence_rows;
  std::vector<int64_t> context_rows;
  double weight = 1.0;
};

struct EncoderGradients {
  std::vector<double> token_emb;
  std::vector<double> type_emb;
  std::vector<double> seg_emb;
  double scale = 0.0;
  double loss = 0.0;
};

namespace detail {

struct BatchForward {
  std::vector<RawEncoding> questions;
  std::vector<RawEncoding> answers;
  std::vector<double> scores;  // B x B, scores[i*B+j] = scale * <q_i, a_j>
  std::vector<double> probs;   // in-batch softmax rows
  double loss = 0.0;
};

inline void check_batch(std::span<const TrainExample> batch) {
  if (batch.size() < 2) {
    throw ConfigError("batch must hold at least 2 examples for in-batch negatives");
  }
  for (const auto& ex : batch) {
    if (!(ex.weight >= 0.0 && ex.weight <= 1.0)) {
      throw ConfigError("batch weight outside [0,1]");
    }
  }
}

inline BatchForward forward(const EncoderModel& m, std::span<const TrainExample> batch) {
  check_batch(batch);
  const size_t B = batch.size();
  BatchForward f;
  f.questions.reserve(B);
  f.answers.reserve(B);
  for (const auto& ex : batch) {
    f.questions.push_back(
        encode_raw(m, ex.question_rows, {}, kSegNone, kSegNone, kTypeQuestion));
    f.answers.push_back(encode_raw(m, ex.sentence_rows, ex.context_rows, kSegSentence,
                                   kSegContext, kTypeAnswer));
  }
  const double scale = static_cast<double>(m.scale);
  f.scores.resize(B * B);
  for (size_t i = 0; i < B; ++i) {
    for (size_t j = 0; j < B; ++j) {
      double s = 0.0;
      const auto& q = f.questions[i].unit;
      const auto& a = f.answers[j].unit;
      for (size_t k = 0; k < q.size(); ++k) s += q[k] * a[k];
      f.scores[i * B + j] = scale * s;
    }
  }
  // weighted NLL of the in-batch softmax, log-sum-exp with max subtraction
  f.probs.resize(B * B);
  double loss = 0.0;
  for (size_t i = 0; i < B; ++i) {
    const double* row = &f.scores[i * B];
    double mx = row[0];
    for (size_t j = 1; j < B; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < B; ++j) sum += std::exp(row[j] - mx);
    const double lse = mx + std::log(sum);
    for (size_t j = 0; j < B; ++j) f.probs[i * B + j] = std::exp(row[j] - lse);
    loss += batch[i].weight * (lse - row[i]);
  }
  f.loss = loss / static_cast<double>(B);
  if (!std::isfinite(f.loss)) {
    throw NumericError("batch loss is not finite");
  }
  return f;
}

}  // namespace detail

// Weighted in-batch sampled softmax loss:
//   L = -(1/B) * sum_i w_i * log( exp(s_ii) / sum_j exp(s_ij) )
// where s_ij = scale * <q_i, a_j> and the batch's answers form the candidate
// set for every question in the batch.
inline double batch_loss(const EncoderModel& m, std::span<const TrainExample> batch) {
  return detail::forward(m, batch).loss;
}

// Analytic gradients of batch_loss for every parameter table and the scale.
// Rows untouched by the batch keep exactly zero gradient; per-example terms
// are reduced in batch order so results are bit-reproducible.
inline EncoderGradients batch_gradients(const EncoderModel& m,
                                        std::span<const TrainExample> batch) {
  auto f = detail::forward(m, batch);
  const size_t B = batch.size();
  const int d = m.dim;
  const double scale = static_cast<double>(m.scale);

  EncoderGradients g;
  g.loss = f.loss;
  g.token_emb.assign(m.token_emb.size(), 0.0);
  g.type_emb.assign(m.type_emb.size(), 0.0);
  g.seg_emb.assign(m.seg_emb.size(), 0.0);

  // dL/ds_ij = (w_i / B) * (p_ij - [i == j])
  std::vector<double> gs(B * B);
  for (size_t i = 0; i < B; ++i) {
    for (size_t j = 0; j < B; ++j) {
      double delta = (i == j) ? 1.0 : 0.0;
      gs[i * B + j] = batch[i].weight / static_cast<double>(B) * (f.probs[i * B + j] - delta);
    }
  }

  for (size_t i = 0; i < B; ++i) {
    for (size_t j = 0; j < B; ++j) {
      g.scale += gs[i * B + j] * dot(f.questions[i].unit, f.answers[j].unit);
    }
  }

  std::vector<double> dvec(static_cast<size_t>(d));
  auto backprop_norm = [&](const detail::RawEncoding& enc, const std::vector<double>& dunit,
                           std::vector<double>& du) {
    double proj = 0.0;
    for (int k = 0; k < d; ++k) proj += enc.unit[k] * dunit[k];
    for (int k = 0; k < d; ++k) du[k] = (dunit[k] - enc.unit[k] * proj) / enc.norm;
  };
  std::vector<double> du(static_cast<size_t>(d));

  // question side
  for (size_t i = 0; i < B; ++i) {
    std::fill(dvec.begin(), dvec.end(), 0.0);
    for (size_t j = 0; j < B; ++j) {
      const double c = scale * gs[i * B + j];
      if (c == 0.0) continue;
      const auto& a = f.answers[j].unit;
      for (int k = 0; k < d; ++k) dvec[k] += c * a[k];
    }
    backprop_norm(f.questions[i], dvec, du);
    const auto& rows = batch[i].question_rows;
    if (!rows.empty()) {
      const double inv = 1.0 / static_cast<double>(rows.size());
      for (int64_t row : rows) {
        double* dst = &g.token_emb[static_cast<size_t>(row) * d];
        for (int k = 0; k < d; ++k) dst[k] += du[k] * inv;
      }
    }
    double* ty = &g.type_emb[detail::kTypeQuestion * d];
    for (int k = 0; k < d; ++k) ty[k] += du[k];
  }

  // answer side
  for (size_t j = 0; j < B; ++j) {
    std::fill(dvec.begin(), dvec.end(), 0.0);
    for (size_t i = 0; i < B; ++i) {
      const double c = scale * gs[i * B + j];
      if (c == 0.0) continue;
      const auto& q = f.questions[i].unit;
      for (int k = 0; k < d; ++k) dvec[k] += c * q[k];
    }
    backprop_norm(f.answers[j], dvec, du);
    const auto& sent = batch[j].sentence_rows;
    const auto& ctx = batch[j].context_rows;
    const size_t total = sent.size() + ctx.size();
    if (total > 0) {
      const double inv = 1.0 / static_cast<double>(total);
      for (int64_t row : sent) {
        double* dst = &g.token_emb[static_cast<size_t>(row) * d];
        for (int k = 0; k < d; ++k) dst[k] += du[k] * inv;
      }
      for (int64_t row : ctx) {
        double* dst = &g.token_emb[static_cast<size_t>(row) * d];
        for (int k = 0; k < d; ++k) dst[k] += du[k] * inv;
      }
      double* s0 = &g.seg_emb[detail::kSegSentence * d];
      double* s1 = &g.seg_emb[detail::kSegContext * d];
      const double cs = static_cast<double>(sent.size()) * inv;
      const double cc = static_cast<double>(ctx.size()) * inv;
      for (int k = 0; k < d; ++k) s0[k] += cs * du[k];
      for (int k = 0; k < d; ++k) s1[k] += cc * du[k];
    }
    double* ty = &g.type_emb[detail::kTypeAnswer * d];
    for (int k = 0; k < d; ++k) ty[k] += du[k];
  }

  return g;
}

// Adam with bias correction (Kingma & Ba). Moments live in double; the
// parameters themselves stay 32-bit.
struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  std::vector<double> m_token, v_token;
  std::vector<double> m_type, v_type;
  std::vector<double> m_seg, v_seg;
  double m_scale = 0.0, v_scale = 0.0;
  int64_t step = 0;

  static OptimizerState init(const EncoderModel& model) {
    OptimizerState s;
    s.m_token.assign(model.token_emb.size(), 0.0);
    s.v_token.assign(model.token_emb.size(), 0.0);
    s.m_type.assign(model.type_emb.size(), 0.0);
    s.v_type.assign(model.type_emb.size(), 0.0);
    s.m_seg.assign(model.seg_emb.size(), 0.0);
    s.v_seg.assign(model.seg_emb.size(), 0.0);
    return s;
  }
};

namespace detail {

inline void adam_apply(std::vector<float>& param, const std::vector<double>& grad,
                       std::vector<double>& m, std::vector<double>& v, const AdamConfig& cfg,
                       double bc1, double bc2) {
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    param[i] = static_cast<float>(static_cast<double>(param[i]) -
                                  cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

}  // namespace detail

inline void adam_step(EncoderModel& model, const EncoderGradients& grad, OptimizerState& state,
                      const AdamConfig& cfg, double scale_floor = 1e-3) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  detail::adam_apply(model.token_emb, grad.token_emb, state.m_token, state.v_token, cfg, bc1, bc2);
  detail::adam_apply(model.type_emb, grad.type_emb, state.m_type, state.v_type, cfg, bc1, bc2);
  detail::adam_apply(model.seg_emb, grad.seg_emb, state.m_seg, state.v_seg, cfg, bc1, bc2);
  state.m_scale = cfg.beta1 * state.m_scale + (1.0 - cfg.beta1) * grad.scale;
  state.v_scale = cfg.beta2 * state.v_scale + (1.0 - cfg.beta2) * grad.scale * grad.scale;
  const double mhat = state.m_scale / bc1;
  const double vhat = state.v_scale / bc2;
  double s = static_cast<double>(model.scale) - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  model.scale = static_cast<float>(std::max(s, scale_floor));
}

struct TrainConfig {
  int batch_size = 32;
  int epochs = 50;
  double lr = 1e-3;
  uint64_t seed = 1;
  bool shuffle = true;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double scale_floor = 1e-3;
  std::function<void(int epoch, double mean_loss)> on_epoch;
};

// Resolves weighted pairs against the split's questions and the pool, and
// tokenizes once up front.
inline std::vector<TrainExample> build_training_examples(const DatasetSplit& split,
                                                         const CandidatePool& pool,
                                                         const Vocab& vocab, int32_t hash_buckets,
                                                         const std::vector<WeightedPair>& pairs) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : split.questions) by_id[q.id] = &q;
  std::vector<TrainExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto qit = by_id.find(p.question_id);
    if (qit == by_id.end()) {
      throw DataError("training pair references unknown question id '" + p.question_id + "'");
    }
    const CandidateEntry* c = pool.find(p.candidate_id);
    if (c == nullptr) {
      throw DataError("training pair references unknown candidate id '" + p.candidate_id + "'");
    }
    if (!(p.w > 0.0 && p.w <= 1.0)) {
      throw DataError("training pair weight outside (0,1] for (" + p.question_id + ", " +
                      p.candidate_id + ")");
    }
    TrainExample ex;
    ex.question_rows = token_rows(vocab, hash_buckets, tokenize(qit->second->text));
    ex.sentence_rows = token_rows(vocab, hash_buckets, tokenize(c->sentence));
    ex.context_rows = token_rows(vocab, hash_buckets, tokenize(c->context));
    ex.weight = p.w;
    out.push_back(std::move(ex));
  }
  return out;
}

// Mini-batch training with a seeded shuffle per epoch; the last ragged batch
// is dropped. Deterministic under the seed: reruns produce bit-identical
// parameters.
inline EncoderModel train(EncoderModel model, const std::vector<TrainExample>& examples,
                          const TrainConfig& cfg) {
  if (cfg.batch_size < 2) throw ConfigError("train: batch_size must be >= 2");
  if (examples.size() < static_cast<size_t>(cfg.batch_size)) {
    throw DataError("train: need at least batch_size (" + std::to_string(cfg.batch_size) +
                    ") examples, got " + std::to_string(examples.size()));
  }
  AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, cfg.eps};
  OptimizerState state = OptimizerState::init(model);
  Rng rng(derive_seed(cfg.seed, "train_shuffle"));
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const size_t B = static_cast<size_t>(cfg.batch_size);
  std::vector<TrainExample> batch(B);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start + B <= order.size(); start += B) {
      for (size_t i = 0; i < B; ++i) batch[i] = examples[order[start + i]];
      EncoderGradients g;
      try {
        g = batch_gradients(model, batch);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches) + ": " + e.what());
      }
      adam_step(model, g, state, adam, cfg.scale_floor);
      epoch_loss += g.loss;
      ++batches;
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, epoch_loss / static_cast<double>(batches));
  }
  return model;
}

// --- retrieval over a frozen model ------------------------------------------

struct PoolEmbeddings {
  std::vector<std::string> ids;  // ascending candidate id
  std::vector<double> matrix;    // ids.size() x dim, row-major, unit rows
  int32_t dim = 0;
};

inline PoolEmbeddings encode_pool(const EncoderModel& m, const Vocab& vocab,
                                  const CandidatePool& pool) {
  if (pool.empty()) throw DataError("encode_pool: empty pool");
  PoolEmbeddings out;
  out.dim = m.dim;
  out.ids.reserve(pool.size());
  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return pool.at(a).id < pool.at(b).id; });
  out.matrix.reserve(pool.size() * static_cast<size_t>(m.dim));
  for (size_t idx : order) {
    const CandidateEntry& e = pool.at(idx);
    EmbeddingVec v = encode_answer(m, vocab, tokenize(e.sentence), tokenize(e.context));
    out.ids.push_back(e.id);
    out.matrix.insert(out.matrix.end(), v.begin(), v.end());
  }
  return out;
}

// Exact brute-force maximum-inner-product ranking; ties broken by ascending
// candidate id.
inline std::vector<ScoredCandidate> dense_top_k(const EmbeddingVec& query,
                                                const PoolEmbeddings& pool, size_t k,
                                                double scale = 1.0) {
  if (k < 1) throw ConfigError("dense_top_k: k must be >= 1");
  const size_t n = pool.ids.size();
  std::vector<std::pair<double, size_t>> scored(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = &pool.matrix[i * static_cast<size_t>(pool.dim)];
    double s = 0.0;
    for (int32_t d = 0; d < pool.dim; ++d) s += query[static_cast<size_t>(d)] * row[d];
    scored[i] = {scale * s, i};
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // index order == id order
  });
  if (scored.size() > k) scored.resize(k);
  std::vector<ScoredCandidate> out;
  out.reserve(scored.size());
  for (const auto& [s, i] : scored) out.push_back({pool.ids[i], s});
  return out;
}

// --- checkpoint --------------------------------------------------------------
// Versioned little-endian binary: header (magic, version, d, |V|, H, scale),
// then the token, type, and segment tables as 32-bit floats in that order.

inline void save_model(const EncoderModel& m, std::ostream& os) {
  os.write("SQAENC1\n", 8);
  write_u32le(os, 1);
  write_u32le(os, static_cast<uint32_t>(m.dim));
  write_u64le(os, static_cast<uint64_t>(m.vocab_size));
  write_u32le(os, static_cast<uint32_t>(m.hash_buckets));
  write_f32le(os, m.scale);
  for (float x : m.token_emb) write_f32le(os, x);
  for (float x : m.type_emb) write_f32le(os, x);
  for (float x : m.seg_emb) write_f32le(os, x);
}

inline void save_model_file(const EncoderModel& m, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write model checkpoint: " + path);
  save_model(m, os);
}

inline EncoderModel load_model(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string_view(magic, 8) != "SQAENC1\n") throw DataError("bad model magic");
  uint32_t version = read_u32le(is);
  if (version != 1) throw DataError("unsupported model version " + std::to_string(version));
  EncoderModel m;
  m.dim = static_cast<int32_t>(read_u32le(is));
  m.vocab_size = static_cast<int64_t>(read_u64le(is));
  m.hash_buckets = static_cast<int32_t>(read_u32le(is));
  m.scale = read_f32le(is);
  auto read_table = [&](std::vector<float>& v, size_t n) {
    v.resize(n);
    for (auto& x : v) x = read_f32le(is);
  };
  read_table(m.token_emb, static_cast<size_t>(m.rows()) * static_cast<size_t>(m.dim));
  read_table(m.type_emb, 2 * static_cast<size_t>(m.dim));
  read_table(m.seg_emb, 2 * static_cast<size_t>(m.dim));
  return m;
}

inline EncoderModel load_model_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open model checkpoint: " + path);
  return load_model(is);
}

}  // namespace silverqa

#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "silverqa/config.hpp"
#include "silverqa/corpus.hpp"
#include "silverqa/dense_encoder.hpp"
#include "silverqa/evalkit.hpp"
#include "silverqa/miner.hpp"
#include "silverqa/pair_scorer.hpp"
#include "silverqa/sparse_index.hpp"
#include "silverqa/synthetic.hpp"
#include "silverqa/textproc.hpp"

namespace silverqa {

// Work-dir artifact names shared by the subcommands.
namespace files {
constexpr const char* train_pairs = "train_pairs.jsonl";
constexpr const char* train_pool = "train_pool.jsonl";
constexpr const char* test_pairs = "test_pairs.jsonl";
constexpr const char* test_pool = "test_pool.jsonl";
constexpr const char* mining_oracle = "mining_oracle.jsonl";
constexpr const char* vocab = "vocab.txt";
constexpr const char* bm25_index = "bm25.idx";
constexpr const char* encoder_gold = "encoder_gold.ckpt";
constexpr const char* encoder_augmented = "encoder_augmented.ckpt";
constexpr const char* scorer = "scorer.txt";
constexpr const char* scorer_report = "scorer_report.txt";
constexpr const char* mined_pairs = "mined.jsonl";
constexpr const char* mining_report = "mining_report.txt";
constexpr const char* augmented_pairs = "augmented_pairs.jsonl";
constexpr const char* metrics_gold = "metrics_gold.txt";
constexpr const char* metrics_augmented = "metrics_augmented.txt";
constexpr const char* e2e_table = "e2e_table.txt";
}  // namespace files

namespace detail {

inline std::string work_path(const PipelineConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.work_dir) / name).string();
}

inline void ensure_work_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.work_dir, ec);
  if (ec) throw ConfigError("cannot create work_dir '" + cfg.work_dir + "': " + ec.message());
}

// Path fields fall back to the gen-synthetic outputs in the work dir.
inline std::string resolve_path(const PipelineConfig& cfg, const std::string& configured,
                                const char* fallback, const char* field) {
  std::string path = configured.empty() ? work_path(cfg, fallback) : configured;
  if (!std::filesystem::exists(path)) {
    throw ConfigError(std::string("config field '") + field + "': file not found: " + path);
  }
  return path;
}

}  // namespace detail

inline DatasetSplit load_train_split(const PipelineConfig& cfg) {
  DatasetSplit split =
      load_pairs(detail::resolve_path(cfg, cfg.train_pairs, files::train_pairs, "train_pairs"));
  if (!cfg.pool.empty() || std::filesystem::exists(detail::work_path(cfg, files::train_pool))) {
    split = attach_pool(
        std::move(split),
        load_pool(detail::resolve_path(cfg, cfg.pool, files::train_pool, "pool")));
  }
  return split;
}

inline DatasetSplit load_test_split(const PipelineConfig& cfg) {
  DatasetSplit split =
      load_pairs(detail::resolve_path(cfg, cfg.test_pairs, files::test_pairs, "test_pairs"));
  if (!cfg.test_pool.empty() ||
      std::filesystem::exists(detail::work_path(cfg, files::test_pool))) {
    split = attach_pool(
        std::move(split),
        load_pool(detail::resolve_path(cfg, cfg.test_pool, files::test_pool, "test_pool")));
  }
  return split;
}

// --- gen-synthetic -------------------------------------------------------------

inline SyntheticCorpus cmd_gen_synthetic(const PipelineConfig& cfg,
                                         std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  SyntheticSpec spec;
  spec.entities = cfg.synth_entities;
  spec.test_entities = cfg.synth_test_entities;
  spec.paraphrase_templates = cfg.synth_templates;
  spec.unlabeled_positive_rate = cfg.synth_rate;
  spec.vocab_size = cfg.synth_vocab;
  spec.seed = cfg.seed;

  SyntheticCorpus corpus = generate_synthetic(spec);
  SyntheticPaths paths;
  paths.train_pairs = detail::work_path(cfg, files::train_pairs);
  paths.train_pool = detail::work_path(cfg, files::train_pool);
  paths.test_pairs = detail::work_path(cfg, files::test_pairs);
  paths.test_pool = detail::work_path(cfg, files::test_pool);
  paths.oracle = detail::work_path(cfg, files::mining_oracle);
  save_synthetic(corpus, paths);

  out << "generated synthetic corpus: " << corpus.train.questions.size()
      << " train questions, " << corpus.train.pool.size() << " train candidates, "
      << corpus.test.questions.size() << " test questions, " << corpus.test.pool.size()
      << " test candidates, " << corpus.mining_oracle.size() << " unlabeled positives\n";
  out << "wrote " << paths.train_pairs << ", " << paths.train_pool << ", " << paths.test_pairs
      << ", " << paths.test_pool << ", " << paths.oracle << "\n";
  return corpus;
}

// --- build-index ----------------------------------------------------------------

inline Bm25Index cmd_build_index(const PipelineConfig& cfg, std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  DatasetSplit train = load_train_split(cfg);
  CandidatePool pool = sentence_pool(train);
  Vocab vocab = build_vocab(pool);
  vocab.save_file(detail::work_path(cfg, files::vocab));
  Bm25Index index = Bm25Index::build(pool, vocab);
  index.save_file(detail::work_path(cfg, files::bm25_index));
  out << "built BM25 index over " << index.num_docs() << " candidates, vocab "
      << vocab.size() << " tokens, avg length " << index.avg_len() << "\n";
  return index;
}

namespace detail {

struct TrainContext {
  DatasetSplit train;
  CandidatePool pool;  // sentence pool of the train split
  Vocab vocab;
  Bm25Index index;
};

inline TrainContext load_train_context(const PipelineConfig& cfg) {
  TrainContext ctx;
  ctx.train = load_train_split(cfg);
  ctx.pool = sentence_pool(ctx.train);
  ctx.vocab = build_vocab(ctx.pool);
  ctx.index = Bm25Index::build(ctx.pool, ctx.vocab);
  return ctx;
}

inline EncoderModel train_encoder_on(const PipelineConfig& cfg, const TrainContext& ctx,
                                     const std::vector<WeightedPair>& pairs, std::ostream& out,
                                     const char* label) {
  EncoderConfig enc;
  enc.dim = cfg.encoder_dim;
  enc.hash_buckets = cfg.encoder_hash_buckets;
  enc.scale_init = cfg.encoder_scale_init;
  enc.seed = derive_seed(cfg.seed, "encoder_init");

  TrainConfig train_cfg;
  train_cfg.batch_size = cfg.encoder_batch;
  train_cfg.epochs = cfg.encoder_epochs;
  train_cfg.lr = cfg.encoder_lr;
  train_cfg.seed = derive_seed(cfg.seed, "encoder_train");
  train_cfg.on_epoch = [&](int epoch, double loss) {
    if (epoch % 10 == 0 || epoch == cfg.encoder_epochs - 1) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "[%s] epoch %3d  loss %.6f\n", label, epoch, loss);
      out << buf;
    }
  };

  auto examples =
      build_training_examples(ctx.train, ctx.pool, ctx.vocab, enc.hash_buckets, pairs);
  EncoderModel model = init_model(ctx.vocab, enc);
  return train(std::move(model), examples, train_cfg);
}

}  // namespace detail

// --- train-retriever -------------------------------------------------------------

enum class PairsMode { gold, augmented };

inline EncoderModel cmd_train_retriever(const PipelineConfig& cfg, PairsMode mode,
                                        std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  detail::TrainContext ctx = detail::load_train_context(cfg);

  std::vector<WeightedPair> pairs;
  const char* label = mode == PairsMode::gold ? "gold" : "augmented";
  if (mode == PairsMode::gold) {
    pairs = merge(ctx.train.gold, {});
  } else {
    const std::string path = detail::work_path(cfg, files::augmented_pairs);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("augmented pairs not found (" + path + "); run `mine` first");
    }
    pairs = load_weighted_pairs(path);
  }
  out << "training " << label << " retriever on " << pairs.size() << " weighted pairs\n";
  EncoderModel model = detail::train_encoder_on(cfg, ctx, pairs, out, label);
  const char* name = mode == PairsMode::gold ? files::encoder_gold : files::encoder_augmented;
  save_model_file(model, detail::work_path(cfg, name));
  ctx.vocab.save_file(detail::work_path(cfg, files::vocab));
  out << "saved " << detail::work_path(cfg, name) << "\n";
  return model;
}

// --- train-scorer ------------------------------------------------------------------

struct ScorerReport {
  ClassifierMetrics test;
  double majority_acc = 0.0;
  size_t train_examples = 0;
  size_t test_examples = 0;
};

inline std::string format_scorer_report(const ScorerReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "train_examples %zu\n"
                "test_examples %zu\n"
                "majority_acc %.4f\n"
                "acc %.4f\n"
                "auc_pr %.4f\n",
                r.train_examples, r.test_examples, r.majority_acc, r.test.acc, r.test.auc_pr);
  return buf;
}

inline std::pair<PairClassifier, ScorerReport> cmd_train_scorer(const PipelineConfig& cfg,
                                                                std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  detail::TrainContext ctx = detail::load_train_context(cfg);

  // the dense negative strategy and the miner both use the gold-trained
  // retriever in the role of an off-the-shelf nearest-neighbor encoder
  EncoderModel gold_model;
  const std::string gold_path = detail::work_path(cfg, files::encoder_gold);
  if (std::filesystem::exists(gold_path)) {
    gold_model = load_model_file(gold_path);
  } else {
    gold_model = detail::train_encoder_on(cfg, ctx, merge(ctx.train.gold, {}), out, "gold");
    save_model_file(gold_model, gold_path);
    ctx.vocab.save_file(detail::work_path(cfg, files::vocab));
  }

  PoolEmbeddings train_emb = encode_pool(gold_model, ctx.vocab, ctx.pool);
  RetrieveFn dense = make_dense_retriever(gold_model, ctx.vocab, train_emb);

  NegativeSamplingConfig neg_cfg;
  neg_cfg.per_strategy = cfg.negatives_per_strategy;
  neg_cfg.seed = derive_seed(cfg.seed, "negatives_train");
  NegativeSamplingStats stats;
  auto negatives = sample_negatives(ctx.train, ctx.index, dense, neg_cfg, &stats);
  auto dataset = build_classifier_dataset(ctx.train, std::move(negatives));

  std::vector<PairFeatures> X;
  std::vector<int> y;
  featurize(ctx.train, dataset, ctx.index, ctx.vocab, X, y);

  ScorerConfig scorer_cfg;
  scorer_cfg.lr = cfg.scorer_lr;
  scorer_cfg.epochs = cfg.scorer_epochs;
  scorer_cfg.l2 = cfg.scorer_l2;
  scorer_cfg.seed = derive_seed(cfg.seed, "scorer");
  PairClassifier clf = train_classifier(X, y, scorer_cfg);
  clf.save_file(detail::work_path(cfg, files::scorer));

  // Table-2-style report on a held-out classification set built from the
  // test split with the same 1:1:1 recipe
  DatasetSplit test = load_test_split(cfg);
  CandidatePool test_pool = sentence_pool(test);
  Vocab test_vocab = build_vocab(test_pool);
  Bm25Index test_index = Bm25Index::build(test_pool, test_vocab);
  PoolEmbeddings test_emb = encode_pool(gold_model, ctx.vocab, test_pool);
  RetrieveFn test_dense = make_dense_retriever(gold_model, ctx.vocab, test_emb);
  NegativeSamplingConfig test_neg = neg_cfg;
  test_neg.seed = derive_seed(cfg.seed, "negatives_test");
  auto test_dataset =
      build_classifier_dataset(test, sample_negatives(test, test_index, test_dense, test_neg));
  std::vector<PairFeatures> Xt;
  std::vector<int> yt;
  featurize(test, test_dataset, test_index, test_vocab, Xt, yt);

  ScorerReport report;
  report.test = eval_classifier(clf, Xt, yt);
  report.majority_acc = majority_baseline_acc(yt);
  report.train_examples = X.size();
  report.test_examples = Xt.size();

  std::ofstream rep(detail::work_path(cfg, files::scorer_report), std::ios::binary);
  rep << format_scorer_report(report);
  out << format_scorer_report(report);
  return {std::move(clf), report};
}

// --- mine ----------------------------------------------------------------------

inline MineResult cmd_mine(const PipelineConfig& cfg, std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  detail::TrainContext ctx = detail::load_train_context(cfg);

  const std::string gold_path = detail::work_path(cfg, files::encoder_gold);
  EncoderModel gold_model;
  if (std::filesystem::exists(gold_path)) {
    gold_model = load_model_file(gold_path);
  } else {
    gold_model = detail::train_encoder_on(cfg, ctx, merge(ctx.train.gold, {}), out, "gold");
    save_model_file(gold_model, gold_path);
    ctx.vocab.save_file(detail::work_path(cfg, files::vocab));
  }

  const std::string scorer_path = detail::work_path(cfg, files::scorer);
  PairClassifier clf;
  if (std::filesystem::exists(scorer_path)) {
    clf = PairClassifier::load_file(scorer_path);
  } else {
    clf = cmd_train_scorer(cfg, out).first;
  }

  PoolEmbeddings train_emb = encode_pool(gold_model, ctx.vocab, ctx.pool);
  RetrieveFn retrieve = make_dense_retriever(gold_model, ctx.vocab, train_emb);
  PairScoreFn score_pair = make_pair_scorer(clf, ctx.index, ctx.vocab);

  MineConfig mine_cfg;
  mine_cfg.k = static_cast<size_t>(cfg.mine_k);
  mine_cfg.threshold = cfg.mine_threshold;
  mine_cfg.weight_exponent = cfg.weight_exponent;
  MineResult result = mine(ctx.train, ctx.pool, retrieve, score_pair, mine_cfg);

  save_weighted_pairs_file(result.mined, detail::work_path(cfg, files::mined_pairs));
  std::ofstream rep(detail::work_path(cfg, files::mining_report), std::ios::binary);
  rep << format_mining_report(result.report);
  save_weighted_pairs_file(merge(ctx.train.gold, result.mined),
                           detail::work_path(cfg, files::augmented_pairs));

  out << format_mining_report(result.report);
  out << format_mining_summary(result.report) << "\n";
  return result;
}

// --- evaluate ------------------------------------------------------------------

inline MetricsReport cmd_evaluate(const PipelineConfig& cfg, const std::string& checkpoint,
                                  std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  const std::string vocab_path = detail::work_path(cfg, files::vocab);
  if (!std::filesystem::exists(vocab_path)) {
    throw ConfigError("vocab not found (" + vocab_path + "); run `build-index` or training first");
  }
  if (!std::filesystem::exists(checkpoint)) {
    throw ConfigError("checkpoint not found: " + checkpoint);
  }
  Vocab vocab = Vocab::load_file(vocab_path);
  EncoderModel model = load_model_file(checkpoint);
  DatasetSplit test = load_test_split(cfg);
  MetricsReport report =
      evaluate_retriever(model, vocab, test, static_cast<size_t>(cfg.eval_cutoff));
  out << format_metrics_table({{std::filesystem::path(checkpoint).stem().string(), report}});
  return report;
}

// BM25 baseline over the test split; the index is built over the test pool
// so the protocol matches the dense evaluation.
inline MetricsReport cmd_evaluate_bm25(const PipelineConfig& cfg,
                                       std::ostream& out = std::cout) {
  DatasetSplit test = load_test_split(cfg);
  CandidatePool pool = sentence_pool(test);
  Bm25Index index = Bm25Index::build(pool);
  MetricsReport report = evaluate_retriever(index, test, static_cast<size_t>(cfg.eval_cutoff));
  out << format_metrics_table({{"bm25", report}});
  return report;
}

// --- e2e -----------------------------------------------------------------------

struct E2eResult {
  MetricsReport gold;
  MetricsReport augmented;
  MiningReport mining;
  ScorerReport scorer;
};

// Full pipeline: index, gold retriever, scorer, mining, augmented retriever,
// then side-by-side evaluation. Recomputes everything from the input files;
// reruns with the same seed are byte-identical.
inline E2eResult cmd_e2e(const PipelineConfig& cfg, std::ostream& out = std::cout) {
  detail::ensure_work_dir(cfg);
  detail::TrainContext ctx = detail::load_train_context(cfg);
  ctx.vocab.save_file(detail::work_path(cfg, files::vocab));
  ctx.index.save_file(detail::work_path(cfg, files::bm25_index));

  out << "== gold retriever ==\n";
  std::vector<WeightedPair> gold_pairs = merge(ctx.train.gold, {});
  EncoderModel gold_model = detail::train_encoder_on(cfg, ctx, gold_pairs, out, "gold");
  save_model_file(gold_model, detail::work_path(cfg, files::encoder_gold));

  out << "== pair scorer ==\n";
  auto [clf, scorer_report] = cmd_train_scorer(cfg, out);

  out << "== mining ==\n";
  MineResult mined = cmd_mine(cfg, out);

  out << "== augmented retriever ==\n";
  std::vector<WeightedPair> augmented_pairs = merge(ctx.train.gold, mined.mined);
  EncoderModel augmented_model =
      detail::train_encoder_on(cfg, ctx, augmented_pairs, out, "augmented");
  save_model_file(augmented_model, detail::work_path(cfg, files::encoder_augmented));

  out << "== evaluation ==\n";
  DatasetSplit test = load_test_split(cfg);
  const auto cutoff = static_cast<size_t>(cfg.eval_cutoff);
  E2eResult result;
  result.gold = evaluate_retriever(gold_model, ctx.vocab, test, cutoff);
  result.augmented = evaluate_retriever(augmented_model, ctx.vocab, test, cutoff);
  result.mining = mined.report;
  result.scorer = scorer_report;

  save_metrics_file(result.gold, detail::work_path(cfg, files::metrics_gold));
  save_metrics_file(result.augmented, detail::work_path(cfg, files::metrics_augmented));

  std::string table = format_comparison(result.gold, result.augmented, "gold_only", "augmented");
  std::ofstream tf(detail::work_path(cfg, files::e2e_table), std::ios::binary);
  tf << table;
  out << table;
  return result;
}

}  // namespace silverqa

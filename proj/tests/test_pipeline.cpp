#include "silverqa/pipeline.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "test_util.hpp"

using namespace silverqa;

namespace {

// Small, fast configuration for in-process pipeline runs.
PipelineConfig tiny_config(const std::string& work_dir) {
  PipelineConfig cfg;
  cfg.work_dir = work_dir;
  cfg.synth_entities = 60;
  cfg.synth_test_entities = 25;
  cfg.encoder_dim = 16;
  cfg.encoder_hash_buckets = 64;
  cfg.encoder_epochs = 8;
  cfg.encoder_batch = 8;
  cfg.scorer_epochs = 80;
  cfg.seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("config files parse with comments and overrides apply") {
  TempDir tmp;
  write_file(tmp.file("cfg.txt"),
             "# pipeline settings\n"
             "seed = 9\n"
             "encoder_dim=32\n"
             "\n"
             "work_dir = out\n");
  ConfigMap map = load_config_file(tmp.file("cfg.txt"));
  map["encoder_dim"] = "48";  // command-line override wins
  PipelineConfig cfg = make_config(map);
  CHECK(cfg.seed == 9);
  CHECK(cfg.encoder_dim == 48);
  CHECK(cfg.work_dir == "out");
}

TEST_CASE("unknown keys and bad values are usage errors") {
  CHECK_THROWS_AS(make_config({{"no_such_key", "1"}}), ConfigError);
  CHECK_THROWS_AS(make_config({{"encoder_dim", "abc"}}), ConfigError);
  TempDir tmp;
  write_file(tmp.file("bad.txt"), "this line has no equals\n");
  CHECK_THROWS_AS(load_config_file(tmp.file("bad.txt")), ConfigError);
}

TEST_CASE("out-of-range values are rejected with the field name") {
  PipelineConfig cfg;
  cfg.mine_threshold = 1.01;
  try {
    validate_ranges(cfg);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mine_threshold") != std::string::npos);
  }
}

TEST_CASE("missing input paths raise usage errors naming the field") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  cfg.train_pairs = tmp.file("nope.jsonl");
  std::ostringstream sink;
  try {
    cmd_build_index(cfg, sink);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train_pairs") != std::string::npos);
  }
}

TEST_CASE("gen-synthetic writes loadable files into the work dir") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  SyntheticCorpus corpus = cmd_gen_synthetic(cfg, sink);
  CHECK(corpus.train.questions.size() == 60);
  DatasetSplit train = load_train_split(cfg);
  CHECK(train.questions.size() == 60);
  CHECK(train.pool.size() == corpus.train.pool.size());
  DatasetSplit test = load_test_split(cfg);
  CHECK(test.questions.size() == 25);
}

TEST_CASE("build-index is idempotent: reruns produce byte-identical artifacts") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);
  cmd_build_index(cfg, sink);
  const std::string idx1 = read_file(tmp.file("work") + "/" + files::bm25_index);
  const std::string voc1 = read_file(tmp.file("work") + "/" + files::vocab);
  cmd_build_index(cfg, sink);
  CHECK(read_file(tmp.file("work") + "/" + files::bm25_index) == idx1);
  CHECK(read_file(tmp.file("work") + "/" + files::vocab) == voc1);
  CHECK(!idx1.empty());
}

TEST_CASE("the full pipeline runs end to end and improves nothing silently") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);

  E2eResult result = cmd_e2e(cfg, sink);
  CHECK(result.gold.num_questions == 25);
  CHECK(result.augmented.num_questions == 25);
  CHECK(result.mining.questions_processed == 60);
  CHECK(result.scorer.test.acc >= 0.0);

  // artifacts all exist
  for (const char* name :
       {files::vocab, files::bm25_index, files::encoder_gold, files::encoder_augmented,
        files::scorer, files::scorer_report, files::mined_pairs, files::mining_report,
        files::augmented_pairs, files::metrics_gold, files::metrics_augmented,
        files::e2e_table}) {
    INFO(name);
    CHECK(std::filesystem::exists(tmp.file("work") + "/" + name));
  }

  // mined pairs respect the weighting rule
  auto mined = load_weighted_pairs(tmp.file("work") + "/" + files::mined_pairs);
  for (const auto& m : mined) {
    CHECK(m.p >= cfg.mine_threshold);
    CHECK_THAT(m.w, Catch::Matchers::WithinAbs(m.p * m.p, 1e-12));
  }

  // the scorer report carries accuracy, AUC-PR, and the majority baseline
  const std::string report = read_file(tmp.file("work") + "/" + files::scorer_report);
  CHECK(report.find("acc ") != std::string::npos);
  CHECK(report.find("auc_pr ") != std::string::npos);
  CHECK(report.find("majority_acc ") != std::string::npos);

  // the mining report file mirrors the in-memory counters
  const std::string mining = read_file(tmp.file("work") + "/" + files::mining_report);
  CHECK(mining.find("kept_gold_ratio ") != std::string::npos);
}

TEST_CASE("the bm25 baseline evaluates the test split") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);
  MetricsReport rep = cmd_evaluate_bm25(cfg, sink);
  CHECK(rep.num_questions == 25);
  CHECK(rep.p_at.at(1) > 0.0);  // lexical overlap retrieves most synthetic golds
}

TEST_CASE("e2e reruns with the same seed are byte-identical") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);

  cmd_e2e(cfg, sink);
  const std::string gold1 = read_file(tmp.file("work") + "/" + files::metrics_gold);
  const std::string aug1 = read_file(tmp.file("work") + "/" + files::metrics_augmented);
  const std::string ck1 = read_file(tmp.file("work") + "/" + files::encoder_gold);
  const std::string ck2 = read_file(tmp.file("work") + "/" + files::encoder_augmented);

  cmd_e2e(cfg, sink);
  CHECK(read_file(tmp.file("work") + "/" + files::metrics_gold) == gold1);
  CHECK(read_file(tmp.file("work") + "/" + files::metrics_augmented) == aug1);
  CHECK(read_file(tmp.file("work") + "/" + files::encoder_gold) == ck1);
  CHECK(read_file(tmp.file("work") + "/" + files::encoder_augmented) == ck2);
}

TEST_CASE("train-retriever writes a checkpoint that evaluates reproducibly") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);
  cmd_train_retriever(cfg, PairsMode::gold, sink);

  const std::string ckpt = tmp.file("work") + "/" + files::encoder_gold;
  MetricsReport a = cmd_evaluate(cfg, ckpt, sink);
  MetricsReport b = cmd_evaluate(cfg, ckpt, sink);
  CHECK(a.p_at == b.p_at);
  CHECK(a.mrr_value == b.mrr_value);
}

TEST_CASE("train-retriever augmented requires a prior mine run") {
  TempDir tmp;
  PipelineConfig cfg = tiny_config(tmp.file("work"));
  std::ostringstream sink;
  cmd_gen_synthetic(cfg, sink);
  CHECK_THROWS_AS(cmd_train_retriever(cfg, PairsMode::augmented, sink), ConfigError);
}

#include "silverqa/dense_encoder.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>
#include <sstream>

#include "grad_check.hpp"
#include "silverqa/rng.hpp"

using namespace silverqa;

namespace {

Vocab toy_vocab(size_t n) {
  std::vector<TokenSeq> docs;
  for (size_t i = 0; i < n; ++i) docs.push_back({"tok" + std::to_string(i)});
  return build_vocab_from_docs(docs);
}

double norm(const EmbeddingVec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Scalar reference for the weighted in-batch softmax loss, computed from a
// score matrix alone.
double scalar_loss(const std::vector<std::vector<double>>& s, const std::vector<double>& w) {
  const size_t B = s.size();
  double total = 0.0;
  for (size_t i = 0; i < B; ++i) {
    double denom = 0.0;
    for (size_t j = 0; j < B; ++j) denom += std::exp(s[i][j]);
    total += w[i] * (-std::log(std::exp(s[i][i]) / denom));
  }
  return total / static_cast<double>(B);
}

}  // namespace

TEST_CASE("init_model is deterministic and bounded") {
  Vocab v = toy_vocab(12);
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.hash_buckets = 16;
  cfg.seed = 42;
  EncoderModel a = init_model(v, cfg);
  EncoderModel b = init_model(v, cfg);
  CHECK(a.token_emb == b.token_emb);
  CHECK(a.type_emb == b.type_emb);
  CHECK(a.seg_emb == b.seg_emb);
  CHECK(a.scale == b.scale);

  cfg.seed = 43;
  EncoderModel c = init_model(v, cfg);
  CHECK(a.token_emb != c.token_emb);

  for (float x : a.token_emb) {
    CHECK(x > -0.05f);
    CHECK(x < 0.05f);
  }
  CHECK(a.rows() == 12 + 16);
}

TEST_CASE("encodings are unit norm and bag-of-tokens") {
  Vocab v = toy_vocab(10);
  EncoderConfig cfg;
  cfg.dim = 16;
  cfg.seed = 1;
  EncoderModel m = init_model(v, cfg);

  EmbeddingVec q1 = encode_question(m, v, {"tok1", "tok2", "tok3"});
  CHECK_THAT(norm(q1), Catch::Matchers::WithinAbs(1.0, 1e-9));
  EmbeddingVec q2 = encode_question(m, v, {"tok3", "tok1", "tok2"});
  CHECK(q1 == q2);  // mean is order-invariant

  // empty question encodes the (normalized) question type embedding
  EmbeddingVec e = encode_question(m, v, {});
  double s = 0.0;
  for (int k = 0; k < m.dim; ++k) s += static_cast<double>(m.type_emb[k]) * m.type_emb[k];
  const double n = std::sqrt(s);
  for (int k = 0; k < m.dim; ++k) {
    CHECK_THAT(e[static_cast<size_t>(k)],
               Catch::Matchers::WithinAbs(static_cast<double>(m.type_emb[k]) / n, 1e-12));
  }
}

TEST_CASE("answer encoding is segment sensitive") {
  Vocab v = toy_vocab(10);
  EncoderConfig cfg;
  cfg.dim = 16;
  cfg.seed = 5;
  EncoderModel m = init_model(v, cfg);

  EmbeddingVec a1 = encode_answer(m, v, {"tok1", "tok2"}, {});
  CHECK_THAT(norm(a1), Catch::Matchers::WithinAbs(1.0, 1e-9));

  // moving a token from sentence to context changes the encoding
  EmbeddingVec a2 = encode_answer(m, v, {"tok1"}, {"tok2"});
  CHECK(a1 != a2);

  // questions and answers with identical tokens differ via the type embedding
  EmbeddingVec q = encode_question(m, v, {"tok1", "tok2"});
  CHECK(q != a1);
}

TEST_CASE("score is the scaled dot product") {
  EmbeddingVec q = {1.0, 0.0};
  CHECK(score(q, {1.0, 0.0}, 10.0) == 10.0);
  CHECK(score(q, {0.0, 1.0}, 10.0) == 0.0);
  CHECK(score(q, {-1.0, 0.0}, 10.0) == -10.0);
}

TEST_CASE("batch_loss equals ln B under uniform scores and unit weights") {
  Vocab v = toy_vocab(4);
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.seed = 9;
  EncoderModel m = init_model(v, cfg);
  TrainExample ex;
  ex.question_rows = {0, 1};
  ex.sentence_rows = {2};
  ex.context_rows = {3};
  ex.weight = 1.0;
  for (size_t B : {2u, 4u, 8u, 64u}) {
    std::vector<TrainExample> batch(B, ex);  // identical rows -> uniform score matrix
    CHECK_THAT(batch_loss(m, batch),
               Catch::Matchers::WithinAbs(std::log(static_cast<double>(B)), 1e-6));
  }
}

TEST_CASE("loss is linear in the weights") {
  auto inst = make_random_instance(1234, 4, 8);
  for (auto& ex : inst.batch) ex.weight = 1.0;
  const double full = batch_loss(inst.model, inst.batch);
  for (auto& ex : inst.batch) ex.weight = 0.5;
  const double half = batch_loss(inst.model, inst.batch);
  CHECK_THAT(half, Catch::Matchers::WithinAbs(0.5 * full, 1e-15));
}

TEST_CASE("batch_loss matches a hand-built scalar computation on a 2x2 toy") {
  // d=2 embeddings arranged so q1=a1=(1,0), q2=a2=(0,1) after normalization
  EncoderModel m;
  m.dim = 2;
  m.vocab_size = 2;
  m.hash_buckets = 1;
  m.token_emb = {0.5f, 0.0f, 0.0f, 0.5f, 0.0f, 0.0f};  // rows: tok0, tok1, oov
  m.type_emb = {0.0f, 0.0f, 0.0f, 0.0f};
  m.seg_emb = {0.0f, 0.0f, 0.0f, 0.0f};
  m.scale = 3.0f;

  TrainExample e1, e2;
  e1.question_rows = {0};
  e1.sentence_rows = {0};
  e1.weight = 1.0;
  e2.question_rows = {1};
  e2.sentence_rows = {1};
  e2.weight = 0.7;
  std::vector<TrainExample> batch = {e1, e2};

  // scores: s11=s22=3, s12=s21=0
  const double expected = scalar_loss({{3.0, 0.0}, {0.0, 3.0}}, {1.0, 0.7});
  CHECK_THAT(batch_loss(m, batch), Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("uniform unit weights reduce to the unweighted softmax loss") {
  auto inst = make_random_instance(777, 6, 8);
  for (auto& ex : inst.batch) ex.weight = 1.0;
  const size_t B = inst.batch.size();
  // w-free reference: rebuild the score matrix from encodings and apply the
  // plain in-batch softmax NLL
  std::vector<std::vector<double>> s(B, std::vector<double>(B));
  for (size_t i = 0; i < B; ++i) {
    EmbeddingVec q = encode_question_rows(inst.model, inst.batch[i].question_rows);
    for (size_t j = 0; j < B; ++j) {
      EmbeddingVec a = encode_answer_rows(inst.model, inst.batch[j].sentence_rows,
                                          inst.batch[j].context_rows);
      s[i][j] = score(q, a, static_cast<double>(inst.model.scale));
    }
  }
  const double expected = scalar_loss(s, std::vector<double>(B, 1.0));
  CHECK_THAT(batch_loss(inst.model, inst.batch), Catch::Matchers::WithinAbs(expected, 1e-9));
}

TEST_CASE("loss is invariant under batch permutation") {
  auto inst = make_random_instance(31337, 8, 8);
  const double base = batch_loss(inst.model, inst.batch);
  std::vector<TrainExample> shuffled = inst.batch;
  Rng rng(5);
  rng.shuffle(shuffled);
  CHECK_THAT(batch_loss(inst.model, shuffled), Catch::Matchers::WithinAbs(base, 1e-12));
}

TEST_CASE("batch preconditions are enforced") {
  auto inst = make_random_instance(2, 2, 4);
  std::vector<TrainExample> one(inst.batch.begin(), inst.batch.begin() + 1);
  CHECK_THROWS_AS(batch_loss(inst.model, one), ConfigError);
  inst.batch[0].weight = 1.5;
  CHECK_THROWS_AS(batch_loss(inst.model, inst.batch), ConfigError);
}

TEST_CASE("non-finite parameters abort with a numeric error") {
  auto inst = make_random_instance(3, 4, 4);
  inst.model.token_emb[0] = std::numeric_limits<float>::quiet_NaN();
  bool touches_row0 = false;
  for (auto& ex : inst.batch) {
    ex.question_rows = {0};
    touches_row0 = true;
  }
  REQUIRE(touches_row0);
  CHECK_THROWS_AS(batch_loss(inst.model, inst.batch), NumericError);
}

TEST_CASE("analytic gradients match central finite differences") {
  for (uint64_t seed : {101u, 102u, 103u, 104u, 105u}) {
    auto inst = make_random_instance(seed, 2 + seed % 3, 4);
    auto res = finite_difference_check(inst.model, inst.batch, 1e-3);
    INFO("seed " << seed << ", checked " << res.checked);
    CHECK(res.max_rel_err <= 1e-4);
  }
}

TEST_CASE("all-zero weights give an exactly zero gradient") {
  auto inst = make_random_instance(555, 4, 8);
  for (auto& ex : inst.batch) ex.weight = 0.0;
  EncoderGradients g = batch_gradients(inst.model, inst.batch);
  for (double x : g.token_emb) CHECK(x == 0.0);
  for (double x : g.type_emb) CHECK(x == 0.0);
  for (double x : g.seg_emb) CHECK(x == 0.0);
  CHECK(g.scale == 0.0);
}

TEST_CASE("rows absent from the batch have exactly zero gradient") {
  auto inst = make_random_instance(888, 3, 4);
  std::vector<char> touched(static_cast<size_t>(inst.model.rows()), 0);
  for (const auto& ex : inst.batch) {
    for (int64_t r : ex.question_rows) touched[static_cast<size_t>(r)] = 1;
    for (int64_t r : ex.sentence_rows) touched[static_cast<size_t>(r)] = 1;
    for (int64_t r : ex.context_rows) touched[static_cast<size_t>(r)] = 1;
  }
  EncoderGradients g = batch_gradients(inst.model, inst.batch);
  for (int64_t row = 0; row < inst.model.rows(); ++row) {
    if (touched[static_cast<size_t>(row)]) continue;
    for (int k = 0; k < inst.model.dim; ++k) {
      CHECK(g.token_emb[static_cast<size_t>(row) * inst.model.dim + k] == 0.0);
    }
  }
}

TEST_CASE("training is bit-deterministic under a seed") {
  Vocab v = toy_vocab(20);
  EncoderConfig ecfg;
  ecfg.dim = 8;
  ecfg.seed = 3;
  TrainConfig tcfg;
  tcfg.batch_size = 4;
  tcfg.epochs = 5;
  tcfg.lr = 1e-2;
  tcfg.seed = 77;

  std::vector<TrainExample> examples;
  Rng rng(6);
  for (int i = 0; i < 12; ++i) {
    TrainExample ex;
    ex.question_rows = {static_cast<int64_t>(rng.below(20))};
    ex.sentence_rows = {static_cast<int64_t>(rng.below(20))};
    ex.weight = 1.0;
    examples.push_back(ex);
  }
  EncoderModel m1 = train(init_model(v, ecfg), examples, tcfg);
  EncoderModel m2 = train(init_model(v, ecfg), examples, tcfg);
  CHECK(m1.token_emb == m2.token_emb);
  CHECK(m1.type_emb == m2.type_emb);
  CHECK(m1.seg_emb == m2.seg_emb);
  CHECK(m1.scale == m2.scale);
}

TEST_CASE("training drives the loss down on a separable toy set") {
  // 50 pairs with pairwise-disjoint vocabularies
  std::vector<TokenSeq> docs;
  std::vector<TrainExample> examples;
  for (int i = 0; i < 50; ++i) {
    docs.push_back({"q" + std::to_string(i), "a" + std::to_string(i)});
    TrainExample ex;
    ex.question_rows = {2 * i};  // ids assigned lexicographically; rows set below
    examples.push_back(ex);
  }
  Vocab v = build_vocab_from_docs(docs);
  for (int i = 0; i < 50; ++i) {
    examples[static_cast<size_t>(i)].question_rows = {v.id_of("q" + std::to_string(i))};
    examples[static_cast<size_t>(i)].sentence_rows = {v.id_of("a" + std::to_string(i))};
    examples[static_cast<size_t>(i)].weight = 1.0;
  }
  EncoderConfig ecfg;
  ecfg.dim = 32;
  ecfg.hash_buckets = 4;
  ecfg.seed = 11;
  TrainConfig tcfg;
  tcfg.batch_size = 10;
  tcfg.epochs = 200;
  tcfg.lr = 1e-2;
  tcfg.seed = 12;
  double last_loss = 1e9;
  tcfg.on_epoch = [&](int, double loss) { last_loss = loss; };
  train(init_model(v, ecfg), examples, tcfg);
  CHECK(last_loss < std::log(10.0) / 10.0);
}

TEST_CASE("epoch losses are monotone non-increasing on the separable toy set") {
  std::vector<TokenSeq> docs;
  for (int i = 0; i < 20; ++i) docs.push_back({"q" + std::to_string(i), "a" + std::to_string(i)});
  Vocab v = build_vocab_from_docs(docs);
  std::vector<TrainExample> examples;
  for (int i = 0; i < 20; ++i) {
    TrainExample ex;
    ex.question_rows = {v.id_of("q" + std::to_string(i))};
    ex.sentence_rows = {v.id_of("a" + std::to_string(i))};
    ex.weight = 1.0;
    examples.push_back(ex);
  }
  EncoderConfig ecfg;
  ecfg.dim = 16;
  ecfg.hash_buckets = 4;
  ecfg.seed = 2;
  TrainConfig tcfg;
  tcfg.batch_size = 5;
  tcfg.epochs = 60;
  tcfg.lr = 5e-3;
  tcfg.shuffle = false;  // fixed batches make per-epoch averages comparable
  std::vector<double> losses;
  tcfg.on_epoch = [&](int, double loss) { losses.push_back(loss); };
  train(init_model(v, ecfg), examples, tcfg);
  REQUIRE(losses.size() == 60);
  for (size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-9);
}

TEST_CASE("train validates inputs") {
  Vocab v = toy_vocab(4);
  EncoderConfig ecfg;
  ecfg.dim = 4;
  TrainConfig tcfg;
  tcfg.batch_size = 8;
  std::vector<TrainExample> few(3);
  CHECK_THROWS_AS(train(init_model(v, ecfg), few, tcfg), DataError);
}

TEST_CASE("dense_top_k is an exact brute-force ranking") {
  Vocab v = toy_vocab(30);
  EncoderConfig cfg;
  cfg.dim = 16;
  cfg.seed = 21;
  EncoderModel m = init_model(v, cfg);
  CandidatePool pool;
  Rng rng(77);
  for (int i = 0; i < 60; ++i) {
    CandidateEntry e;
    char id[16];
    std::snprintf(id, sizeof(id), "c%03d", i);
    e.id = id;
    e.sentence = "tok" + std::to_string(rng.below(30)) + " tok" + std::to_string(rng.below(30));
    e.doc_id = "d";
    pool.add(e);
  }
  PoolEmbeddings pe = encode_pool(m, v, pool);

  EmbeddingVec q = encode_question(m, v, {"tok3", "tok7"});
  auto top = dense_top_k(q, pe, 10, static_cast<double>(m.scale));
  REQUIRE(top.size() == 10);

  // independent full-sort oracle over the same embeddings
  std::vector<std::pair<double, std::string>> all;
  for (size_t i = 0; i < pe.ids.size(); ++i) {
    double s = 0.0;
    for (int k = 0; k < pe.dim; ++k) {
      s += q[static_cast<size_t>(k)] * pe.matrix[i * static_cast<size_t>(pe.dim) + k];
    }
    all.push_back({static_cast<double>(m.scale) * s, pe.ids[i]});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (size_t i = 0; i < top.size(); ++i) {
    CHECK(top[i].id == all[i].second);
    CHECK(top[i].score == all[i].first);
  }

  // k=1 returns the argmax; querying with a pool vector retrieves itself
  CHECK(dense_top_k(q, pe, 1)[0].id == all[0].second);
  EmbeddingVec self(pe.matrix.begin() + 5 * pe.dim, pe.matrix.begin() + 6 * pe.dim);
  CHECK(dense_top_k(self, pe, 1)[0].id == pe.ids[5]);
}

TEST_CASE("model checkpoints round-trip bit-exactly") {
  Vocab v = toy_vocab(9);
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.seed = 4;
  EncoderModel m = init_model(v, cfg);
  m.scale = 7.25f;

  std::ostringstream os;
  save_model(m, os);
  std::istringstream is(os.str());
  EncoderModel r = load_model(is);
  CHECK(r.dim == m.dim);
  CHECK(r.vocab_size == m.vocab_size);
  CHECK(r.hash_buckets == m.hash_buckets);
  CHECK(r.scale == m.scale);
  CHECK(r.token_emb == m.token_emb);
  CHECK(r.type_emb == m.type_emb);
  CHECK(r.seg_emb == m.seg_emb);

  // identical encodings after reload
  EmbeddingVec a = encode_question(m, v, {"tok0", "tok5"});
  EmbeddingVec b = encode_question(r, v, {"tok0", "tok5"});
  CHECK(a == b);

  std::ostringstream os2;
  save_model(r, os2);
  CHECK(os.str() == os2.str());
}

TEST_CASE("adam keeps the scale above its floor") {
  auto inst = make_random_instance(99, 2, 4);
  OptimizerState state = OptimizerState::init(inst.model);
  AdamConfig cfg;
  cfg.lr = 50.0;  // absurd rate to slam the scale downward
  EncoderGradients g = batch_gradients(inst.model, inst.batch);
  g.scale = 1e6;
  for (int step = 0; step < 5; ++step) adam_step(inst.model, g, state, cfg);
  CHECK(inst.model.scale >= 1e-3f);
}

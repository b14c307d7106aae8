#include "silverqa/textproc.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "silverqa/rng.hpp"

using namespace silverqa;

TEST_CASE("tokenize basics") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t \n ").empty());
  CHECK(tokenize("Statler and Waldorf!") == TokenSeq{"statler", "and", "waldorf"});
  CHECK(tokenize("Hello, World.") == TokenSeq{"hello", "world"});
  CHECK(tokenize("... !!! ???").empty());  // punctuation-only tokens dropped
  CHECK(tokenize("don't stop") == TokenSeq{"don't", "stop"});  // interior punctuation kept
  CHECK(tokenize("(3.5)") == TokenSeq{"3.5"});
}

TEST_CASE("tokenize handles unicode whitespace and case folding") {
  // U+00A0 no-break space and U+2003 em space both separate tokens
  CHECK(tokenize("a\xC2\xA0o") == TokenSeq{"a", "o"});
  CHECK(tokenize("x\xE2\x80\x83y") == TokenSeq{"x", "y"});
  // Latin-1 and Cyrillic case folding
  CHECK(tokenize("\xC3\x89glise") == TokenSeq{"\xC3\xA9glise"});   // Église
  CHECK(tokenize("\xD0\x94\xD0\xBE\xD0\xBC") == TokenSeq{"\xD0\xB4\xD0\xBE\xD0\xBC"});  // Дом
}

TEST_CASE("tokenize is idempotent on its own joined output") {
  Rng rng(42);
  const std::string alphabet = "abcXYZ0,.!?'-\xC3\x89 \t";
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    const size_t len = rng.below(60);
    for (size_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    TokenSeq once = tokenize(text);
    TokenSeq twice = tokenize(join_tokens(once));
    CHECK(once == twice);
  }
}

TEST_CASE("tokenize is pure") {
  const std::string text = "The SAME input, twice!";
  CHECK(tokenize(text) == tokenize(text));
}

TEST_CASE("build_vocab counts df per document") {
  // a single document "a a b": df(a) = 1 despite two occurrences
  Vocab v = build_vocab_from_docs({{"a", "a", "b"}});
  CHECK(v.size() == 2);
  CHECK(v.df_of("a") == 1);
  CHECK(v.df_of("b") == 1);
  CHECK(v.total_docs() == 1);
}

TEST_CASE("build_vocab min_df filters") {
  Vocab v = build_vocab_from_docs({{"x", "a"}, {"x", "b"}}, 2);
  CHECK(v.size() == 1);
  CHECK(v.id_of("x") == 0);
  CHECK(v.id_of("a") == -1);
}

TEST_CASE("build_vocab rejects empty input") {
  CHECK_THROWS_AS(build_vocab_from_docs({}), DataError);
}

TEST_CASE("vocab ids are dense and lexicographic") {
  Vocab v = build_vocab_from_docs({{"pear", "apple"}, {"mango"}});
  CHECK(v.id_of("apple") == 0);
  CHECK(v.id_of("mango") == 1);
  CHECK(v.id_of("pear") == 2);
  CHECK(v.total_docs() == 2);
}

TEST_CASE("idf formula") {
  Vocab v = build_vocab_from_docs({{"a", "b"}, {"a"}});
  // N=2, df(b)=1 -> ln(1.5/1.5 + 1) = ln 2
  CHECK_THAT(v.idf("b"), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
  // df = N stays strictly positive
  CHECK(v.idf("a") > 0.0);
  // unknown tokens score at df = 0
  CHECK_THAT(v.idf("zzz"), Catch::Matchers::WithinAbs(v.idf_for_df(0), 1e-15));
}

TEST_CASE("idf is strictly decreasing in df") {
  Vocab v = build_vocab_from_docs({{"a"}, {"b"}, {"c"}, {"d"}, {"e"}});
  double prev = v.idf_for_df(0);
  for (uint64_t df = 1; df <= 5; ++df) {
    const double cur = v.idf_for_df(df);
    CHECK(cur > 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("vocab round-trips through its file format") {
  Vocab v = build_vocab_from_docs({{"alpha", "beta"}, {"alpha", "gamma"}});
  std::stringstream ss;
  v.save(ss);
  Vocab loaded = Vocab::load(ss);
  CHECK(loaded == v);
  CHECK(loaded.id_of("beta") == v.id_of("beta"));
  CHECK(loaded.total_docs() == 2);
}

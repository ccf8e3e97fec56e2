#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rdforge/synth.hpp"

using namespace rdforge;

TEST_CASE("synth: one seed, one dataset") {
  SynthOptions opts;
  opts.languages = {"en", "ru"};
  opts.entries_per_language = 12;
  opts.dims = {{"sgns", 4}, {"char", 3}};
  opts.seed = 9;

  const auto a = synth_dataset(opts);
  const auto b = synth_dataset(opts);
  CHECK(a == b);

  opts.seed = 10;
  const auto c = synth_dataset(opts);
  CHECK(a != c);
}

TEST_CASE("synth: shape of the generated corpus") {
  SynthOptions opts;
  opts.languages = {"de", "en"};
  opts.entries_per_language = 10;
  opts.dims = {{"sgns", 5}, {"electra", 2}};

  const auto data = synth_dataset(opts);
  REQUIRE(data.size() == 20);

  std::set<std::string> ids;
  int de = 0, en = 0;
  for (const GlossEntry& e : data) {
    CHECK(ids.insert(e.id).second);
    (e.language == "de" ? de : en) += 1;
    CHECK(!e.gloss.empty());
    REQUIRE(e.sgns.has_value());
    REQUIRE(e.electra.has_value());
    CHECK(!e.char_emb.has_value());
    CHECK(e.sgns->size() == 5);
    CHECK(e.electra->size() == 2);
    for (double x : *e.sgns) CHECK(std::isfinite(x));
    // Gloss lengths follow the grammar: 3..8 words.
    const auto spaces = std::count(e.gloss.begin(), e.gloss.end(), ' ');
    CHECK(spaces >= 2);
    CHECK(spaces <= 7);
  }
  CHECK(de == 10);
  CHECK(en == 10);
}

TEST_CASE("synth: different languages use different letters") {
  SynthOptions opts;
  opts.languages = {"en", "ru"};
  opts.entries_per_language = 8;
  const auto data = synth_dataset(opts);

  auto letters = [&](const std::string& lang) {
    std::set<char> s;
    for (const GlossEntry& e : data) {
      if (e.language != lang) continue;
      for (char c : e.gloss) {
        if (c != ' ') s.insert(c);
      }
    }
    return s;
  };
  CHECK(letters("en") != letters("ru"));
}

TEST_CASE("synth targets: a pure function of the words, not their order") {
  const std::map<std::string, int> dims = {{"sgns", 6}};
  const auto a = synth_targets("red small fruit", "en", dims, 3);
  const auto b = synth_targets("fruit red small", "en", dims, 3);
  const auto c = synth_targets("red small fruit", "en", dims, 3);
  CHECK(a == b);  // bag of words: order cannot matter
  CHECK(a == c);

  // Changing any ingredient changes the output.
  CHECK(a != synth_targets("red small berry", "en", dims, 3));
  CHECK(a != synth_targets("red small fruit", "ru", dims, 3));
  CHECK(a != synth_targets("red small fruit", "en", dims, 4));

  // Repetition shifts the balance toward the repeated word.
  const auto d = synth_targets("red red red red small fruit", "en", dims, 3);
  CHECK(a != d);
}

TEST_CASE("synth targets: dims drive the output widths") {
  const auto t = synth_targets("a b", "en", {{"sgns", 2}, {"char", 7}}, 0);
  REQUIRE(t.size() == 2);
  CHECK(t.at("sgns").size() == 2);
  CHECK(t.at("char").size() == 7);
}

TEST_CASE("synth: misuse is rejected") {
  SynthOptions bad;
  bad.languages = {};
  CHECK_THROWS_WITH_AS(synth_dataset(bad),
                       doctest::Contains("at least one language"),
                       std::runtime_error);
  bad = {};
  bad.languages = {"en", "en"};
  CHECK_THROWS_WITH_AS(synth_dataset(bad), doctest::Contains("duplicate"),
                       std::runtime_error);
  bad = {};
  bad.languages = {""};
  CHECK_THROWS_WITH_AS(synth_dataset(bad), doctest::Contains("empty language"),
                       std::runtime_error);
  bad = {};
  bad.entries_per_language = 0;
  CHECK_THROWS_WITH_AS(synth_dataset(bad),
                       doctest::Contains("entries_per_language"),
                       std::runtime_error);
  bad = {};
  bad.dims = {};
  CHECK_THROWS_WITH_AS(synth_dataset(bad),
                       doctest::Contains("at least one task"),
                       std::runtime_error);
  bad = {};
  bad.dims = {{"glove", 4}};
  CHECK_THROWS_WITH_AS(synth_dataset(bad), doctest::Contains("glove"),
                       std::runtime_error);
  bad = {};
  bad.dims = {{"sgns", 0}};
  CHECK_THROWS_WITH_AS(synth_dataset(bad), doctest::Contains("positive dim"),
                       std::runtime_error);

  CHECK_THROWS_WITH_AS(synth_targets("", "en", {{"sgns", 2}}, 0),
                       doctest::Contains("empty gloss"), std::runtime_error);
}

#include <fstream>
#include <map>

#include "doctest.h"
#include "oracles.hpp"

#include "datm/corpus.hpp"
#include "datm/error.hpp"

using namespace datm;

using Tokens = std::vector<std::string>;

TEST_CASE("tokenize") {
  CHECK(tokenize("The victim was found.") == Tokens{"the", "victim", "was", "found"});
  CHECK(tokenize("bolt_action rifle") == Tokens{"bolt_action", "rifle"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \t ").empty());
  CHECK(tokenize("\"Don't\" self-harm, (now)!") == Tokens{"don't", "self-harm", "now"});
  CHECK(tokenize("... -- !!").empty());
}

namespace {

Document doc(std::string id, const std::string& text) { return {std::move(id), tokenize(text)}; }

// Hand-counts every adjacent within-document pair and its score.
std::map<std::pair<std::string, std::string>, double> score_table(const std::vector<Document>& docs,
                                                                  std::uint64_t min_pair_count) {
  std::map<std::string, double> uni;
  std::map<std::pair<std::string, std::string>, double> bi;
  double total = 0;
  for (const auto& d : docs) {
    for (std::size_t i = 0; i < d.tokens.size(); ++i) {
      uni[d.tokens[i]] += 1;
      total += 1;
      if (i + 1 < d.tokens.size()) bi[{d.tokens[i], d.tokens[i + 1]}] += 1;
    }
  }
  std::map<std::pair<std::string, std::string>, double> out;
  for (const auto& [pair, c] : bi)
    out[pair] = (c - static_cast<double>(min_pair_count)) * total / (uni[pair.first] * uni[pair.second]);
  return out;
}

}  // namespace

TEST_CASE("phrase_score arithmetic") {
  CHECK(phrase_score(4, 4, 4, 20, 1) == doctest::Approx(3.0 * 20 / 16));
  CHECK(phrase_score(1, 3, 3, 100, 5) < 0);
}

TEST_CASE("merge_phrases joins a collocation on a 20-token corpus") {
  std::vector<Document> docs{
      doc("1", "savage arms rifle was found"),
      doc("2", "the savage arms shotgun lay near"),
      doc("3", "a savage arms pistol in the car"),
      doc("4", "owner unknown"),
  };
  std::size_t total = 0;
  for (const auto& d : docs) total += d.token_count();
  REQUIRE(total == 20);

  auto table = score_table(docs, 1);
  // count(savage arms)=3, count(savage)=count(arms)=3, T=20: (3-1)*20/9.
  CHECK(table.at({"savage", "arms"}) == doctest::Approx(40.0 / 9.0));
  CHECK(phrase_score(3, 3, 3, 20, 1) == doctest::Approx(40.0 / 9.0));

  auto merged = merge_phrases(docs, 1.0, 1);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::count(merged[i].tokens.begin(), merged[i].tokens.end(), "savage_arms") == 1);
  }
  // Every pair scoring above the threshold per the table was merged, others not.
  for (const auto& [pair, score] : table) {
    const std::string joined = pair.first + "_" + pair.second;
    bool present = false;
    for (const auto& d : merged)
      present |= std::find(d.tokens.begin(), d.tokens.end(), joined) != d.tokens.end();
    if (score <= 1.0) CHECK_MESSAGE(!present, joined);
  }
}

TEST_CASE("merge_phrases leaves rare and chance pairs alone") {
  std::vector<Document> rare{doc("1", "alpha beta gamma delta")};
  auto out = merge_phrases(rare, 1.0, 5);
  CHECK(out[0].tokens == rare[0].tokens);

  // "x" and "y" are frequent and only meet by chance.
  std::vector<Document> chance;
  for (int i = 0; i < 20; ++i) chance.push_back(doc(std::to_string(i), "x a b c y d e f x g y h"));
  chance.push_back(doc("m", "x y"));
  auto table = score_table(chance, 1);
  CHECK(table.at({"x", "y"}) < 10.0);
  auto merged = merge_phrases(chance, 10.0, 1);
  for (const auto& d : merged)
    CHECK(std::find(d.tokens.begin(), d.tokens.end(), "x_y") == d.tokens.end());
}

TEST_CASE("merge_phrases preserves the underlying word sequence") {
  datm::Rng rng = make_stream(14, "test");
  std::vector<Document> docs;
  for (int d = 0; d < 30; ++d) {
    Document doc{std::to_string(d), {}};
    for (int t = 0; t < 25; ++t) doc.tokens.push_back("v" + std::to_string(uniform_index(rng, 6)));
    docs.push_back(doc);
  }
  auto merged = merge_phrases(merge_phrases(docs, 0.5, 1), 0.5, 1);
  std::size_t joined = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    Tokens rebuilt;
    for (const auto& t : merged[d].tokens) {
      joined += t.find('_') != std::string::npos;
      std::size_t start = 0;
      for (std::size_t pos; (pos = t.find('_', start)) != std::string::npos; start = pos + 1)
        rebuilt.push_back(t.substr(start, pos - start));
      rebuilt.push_back(t.substr(start));
    }
    CHECK(rebuilt == docs[d].tokens);
  }
  CHECK(joined > 0);
}

TEST_CASE("merge_phrases never spans documents and rejects bad thresholds") {
  std::vector<Document> docs{doc("1", "new"), doc("2", "york"), doc("3", "new"), doc("4", "york")};
  auto merged = merge_phrases(docs, 0.01, 0);
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(merged[i].tokens == docs[i].tokens);
  CHECK_THROWS_AS(merge_phrases(docs, 0.0, 1), ConfigError);
}

TEST_CASE("merge_phrases applied twice forms trigrams") {
  std::vector<Document> docs;
  for (int i = 0; i < 5; ++i) docs.push_back(doc(std::to_string(i), "new york city q" + std::to_string(i)));
  auto once = merge_phrases(docs, 1.0, 1);
  auto twice = merge_phrases(once, 1.0, 1);
  CHECK(std::find(twice[0].tokens.begin(), twice[0].tokens.end(), "new_york_city") != twice[0].tokens.end());
}

TEST_CASE("filter_documents boundary") {
  std::vector<Document> docs{{"a", Tokens(49, "t")}, {"b", Tokens(50, "t")}, {"c", Tokens(51, "t")}};
  auto kept = filter_documents(docs, 50);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].id == "b");
  CHECK(filter_documents(docs, 0).size() == 3);
}

TEST_CASE("windows") {
  auto make = [](std::size_t n) {
    Document d{"d", {}};
    for (std::size_t i = 0; i < n; ++i) d.tokens.push_back("t" + std::to_string(i));
    return d;
  };
  SUBCASE("exact fit") {
    auto w = windows(make(10), 10, 1);
    REQUIRE(w.size() == 1);
    CHECK(w[0].terms.size() == 10);
  }
  SUBCASE("stride one") {
    auto w = windows(make(12), 10, 1);
    REQUIRE(w.size() == 3);
    CHECK(w[0].start == 0);
    CHECK(w[1].start == 1);
    CHECK(w[2].start == 2);
    CHECK(w[2].terms.front() == "t2");
  }
  SUBCASE("tail window") {
    auto w = windows(make(25), 10, 10);
    REQUIRE(w.size() == 3);
    CHECK(w[0].start == 0);
    CHECK(w[1].start == 10);
    CHECK(w[2].start == 20);
    CHECK(w[2].terms.size() == 5);
  }
  SUBCASE("short remainder gets an end-anchored window") {
    auto b = window_bounds(22, 10, 10);
    REQUIRE(b.size() == 3);
    CHECK(b[2] == std::pair<std::size_t, std::size_t>{12, 22});
  }
  SUBCASE("short document") {
    auto w = windows(make(4), 10, 1);
    REQUIRE(w.size() == 1);
    CHECK(w[0].terms.size() == 4);
    CHECK(windows(make(0), 10, 1).empty());
  }
  SUBCASE("every token is covered") {
    for (std::size_t n = 1; n < 60; ++n) {
      for (std::size_t len : {3u, 7u, 10u}) {
        for (std::size_t stride = 1; stride <= len; ++stride) {
          std::vector<int> hit(n, 0);
          for (auto [b, e] : window_bounds(n, len, stride)) {
            CHECK(e <= n);
            CHECK(e - b <= len);
            for (std::size_t i = b; i < e; ++i) hit[i] = 1;
          }
          CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));
        }
      }
    }
  }
}

TEST_CASE("read_raw_corpus formats") {
  auto dir = oracle::scratch_dir("raw_corpus");
  std::ofstream(dir / "c.jsonl") << "{\"id\": \"a\", \"text\": \"Hello World\"}\n\n{\"id\": 7, \"text\": \"x\"}\n";
  auto docs = read_raw_corpus(dir / "c.jsonl");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "a");
  CHECK(docs[0].tokens == Tokens{"hello", "world"});
  CHECK(docs[1].id == "7");

  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"a\", \"text\": \"ok\"}\n{\"id\": \"b\"}\n";
  try {
    read_raw_corpus(dir / "bad.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }

  std::ofstream(dir / "c.txt") << "First line.\nsecond LINE\n";
  auto plain = read_raw_corpus(dir / "c.txt");
  REQUIRE(plain.size() == 2);
  CHECK(plain[1].id == "2");
  CHECK(plain[1].tokens == Tokens{"second", "line"});
}

TEST_CASE("tokenized corpus round-trip and counts") {
  std::vector<Document> docs{{"a", {"x", "y", "x"}}, {"b", {}}, {"c", {"y"}}};
  auto back = parse_tokenized_corpus(serialize_tokenized_corpus(docs));
  REQUIRE(back.size() == 3);
  CHECK(back[0].tokens == docs[0].tokens);
  CHECK(back[1].id == "b");
  auto counts = count_terms(docs);
  CHECK(counts.at("x") == 2);
  CHECK(counts.at("y") == 2);
  CHECK_THROWS_AS(parse_tokenized_corpus("{\"id\":\"a\",\"tokens\":\"x\"}\n"), FormatError);
}

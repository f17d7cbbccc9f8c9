#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "ember/data/embeddings.hpp"
#include "ember/data/news.hpp"
#include "ember/data/split.hpp"
#include "ember/data/synthetic.hpp"
#include "ember/error.hpp"

using namespace ember;
using namespace ember::data;

TEST_CASE("tokenize lowercases and drops punctuation") {
  CHECK(tokenize("Breaking: Mayor's plan, REJECTED!") ==
        Sentence{"breaking", "mayor's", "plan", "rejected"});
  CHECK(tokenize("   ").empty());
  const auto ss = split_sentences("First one. Second one!  Third?");
  REQUIRE(ss.size() == 3);
  CHECK(ss[1] == Sentence{"second", "one"});
}

TEST_CASE("corpus parsing") {
  SUBCASE("empty file is an empty corpus") { CHECK(parse_corpus("").empty()); }

  SUBCASE("round trip of tokenized items") {
    NewsItem a{"a1", 0, {"big", "news"}, {{"body", "one"}, {"body", "two"}}, {{"nice"}}, {"img0"}};
    NewsItem b{"b2", 1, {"quiet", "day"}, {{"nothing"}}, {}, {}};
    const auto text = serialize_corpus({a, b});
    const auto back = parse_corpus(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
    CHECK(serialize_corpus(back) == text);
  }

  SUBCASE("raw strings are tokenized") {
    const auto items = parse_corpus(
        R"({"id":"x","label":1,"headline":"Hello World","body":"One. Two three.","comments":["Nice!"],"image_refs":[]})"
        "\n");
    REQUIRE(items.size() == 1);
    CHECK(items[0].headline == Sentence{"hello", "world"});
    CHECK(items[0].body.size() == 2);
    CHECK(items[0].comments == std::vector<Sentence>{{"nice"}});
  }

  SUBCASE("malformed line names the line") {
    try {
      parse_corpus("{\"id\":\"a\",\"label\":1}\n{not json\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("duplicate ids are rejected") {
    CHECK_THROWS_AS(parse_corpus("{\"id\":\"a\",\"label\":1}\n{\"id\":\"a\",\"label\":0}\n"),
                    FormatError);
  }

  SUBCASE("labels outside {0,1}") {
    CHECK_THROWS_AS(parse_corpus("{\"id\":\"a\",\"label\":2}\n"), LabelError);
  }

  SUBCASE("unknown fields are rejected") {
    CHECK_THROWS_AS(parse_corpus("{\"id\":\"a\",\"label\":1,\"title\":\"x\"}\n"), FormatError);
  }

  SUBCASE("multi-sentence headline keeps the first sentence") {
    const auto items =
        parse_corpus("{\"id\":\"a\",\"label\":1,\"headline\":\"One two. Three four.\"}\n");
    CHECK(items[0].headline == Sentence{"one", "two"});
  }

  SUBCASE("missing file") { CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), IoError); }
}

TEST_CASE("embedding table") {
  const auto t = parse_embeddings("cat 1 2 3\ndog 3 4 5\n", 3);
  CHECK(t.rows() == 5);
  CHECK(t.dim() == 3);
  for (double v : t.row(kPad)) CHECK(v == 0.0);
  const auto unk = t.row(kUnk);
  CHECK(unk[0] == doctest::Approx(2.0));
  CHECK(unk[1] == doctest::Approx(3.0));
  CHECK(unk[2] == doctest::Approx(4.0));
  CHECK(t.index("zzqx") == kUnk);
  CHECK(t.index("dog") == 4);
  CHECK(t.row(t.index("cat"))[1] == 2.0);

  CHECK_THROWS_AS(parse_embeddings("cat 1 2\n", 3), FormatError);
  try {
    parse_embeddings("cat 1 2 3\ndog 1 2\n", 3);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(parse_embeddings("a 1 2 3 4\n", 0).dim() == 4);
  CHECK_THROWS_AS(load_embeddings("/nonexistent/vectors.txt"), IoError);
}

TEST_CASE("encoding maps tokens and fills absent components") {
  const auto t = parse_embeddings("cat 1 2 3\ndog 3 4 5\n", 3);
  NewsItem item{"i", 1, {"cat", "zzqx"}, {}, {}, {"a", "b", "c", "d", "e"}};
  const auto e = encode_item(item, t);
  CHECK(e.headline == IndexSentence{3, kUnk});
  CHECK(e.image_refs.size() == 4);
  NewsItem empty{"j", 0, {}, {}, {}, {}};
  CHECK(encode_item(empty, t).headline == IndexSentence{kNoComp});
}

TEST_CASE("split sizes and disjointness") {
  SUBCASE("8:1:1 sizes") {
    const auto s = split_indices(1000, {});
    CHECK(s.train.size() == 800);
    CHECK(s.val.size() == 100);
    CHECK(s.test.size() == 100);
    const auto small = split_indices(10, {});
    CHECK(small.train.size() == 8);
    CHECK(small.val.size() == 1);
    CHECK(small.test.size() == 1);
    CHECK_THROWS_AS(split_indices(9, {}), ConfigError);
  }

  SUBCASE("seeded and deterministic") {
    SplitSpec a{{8, 1, 1}, 7};
    CHECK(split_indices(200, a).train == split_indices(200, a).train);
    SplitSpec b{{8, 1, 1}, 8};
    CHECK(split_indices(200, a).train != split_indices(200, b).train);
  }

  SUBCASE("partition property") {
    for (std::size_t n = 10; n <= 2000; n += 37) {
      const auto s = split_indices(n, {{8, 1, 1}, n});
      std::vector<std::size_t> all;
      all.insert(all.end(), s.train.begin(), s.train.end());
      all.insert(all.end(), s.val.begin(), s.val.end());
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> expect(n);
      std::iota(expect.begin(), expect.end(), 0);
      REQUIRE(all == expect);
      CHECK(s.train.size() == n * 8 / 10);
      CHECK(s.val.size() == n / 10);
    }
  }

  SUBCASE("single-class split warns") {
    std::vector<NewsItem> items;
    for (int i = 0; i < 20; ++i) items.push_back({"i" + std::to_string(i), 1, {"x"}, {}, {}, {}});
    const auto d = split_dataset(items, {});
    CHECK(d.warnings.size() == 3);
  }
}

namespace {

// Nearest topic of a sentence list by majority over topic-word prefixes.
int majority_topic(const std::vector<Sentence>& ss) {
  std::map<int, int> votes;
  for (const auto& s : ss)
    for (const auto& w : s)
      if (w.size() > 1 && w[0] == 't') votes[std::stoi(w.substr(1))]++;
  int best = -1, count = -1;
  for (auto [k, v] : votes)
    if (v > count) best = k, count = v;
  return best;
}

int nearest_centroid(const std::vector<double>& v, const std::vector<std::vector<double>>& cs) {
  int best = 0;
  double dist = INFINITY;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) d += (v[i] - cs[k][i]) * (v[i] - cs[k][i]);
    if (d < dist) dist = d, best = static_cast<int>(k);
  }
  return best;
}

}  // namespace

TEST_CASE("synthetic corpus") {
  SyntheticOptions o;
  o.n = 120;
  o.image_width = 64;
  const auto c = generate_synthetic(o);
  REQUIRE(c.items.size() == 120);
  CHECK(std::count_if(c.items.begin(), c.items.end(), [](auto& i) { return i.label == 0; }) == 40);

  SUBCASE("observable oracle recovers every label") {
    // Topics are read back from the surface data alone: token majorities for
    // text, nearest centroid for images. An item is real iff all agree.
    std::size_t correct = 0;
    for (const auto& item : c.items) {
      std::set<int> seen{majority_topic({item.headline}), majority_topic(item.comments),
                         majority_topic(item.body)};
      for (const auto& ref : item.image_refs)
        seen.insert(nearest_centroid(c.features.find(ref)->original, c.image_centroids));
      correct += (seen.size() == 1) == (item.label == 1);
    }
    CHECK(correct == c.items.size());
  }

  SUBCASE("rate 0 gives only real items") {
    SyntheticOptions z = o;
    z.mismatch_rate = 0;
    const auto r = generate_synthetic(z);
    CHECK(std::all_of(r.items.begin(), r.items.end(), [](auto& i) { return i.label == 1; }));
  }

  SUBCASE("deterministic under a seed") {
    const auto again = generate_synthetic(o);
    CHECK(again.items == c.items);
    CHECK(again.features == c.features);
    SyntheticOptions other = o;
    other.seed = 2;
    CHECK(generate_synthetic(other).items != c.items);
  }

  SUBCASE("written files read back identically") {
    const auto dir = std::filesystem::temp_directory_path() / "ember_synth_test";
    std::filesystem::create_directories(dir);
    save_corpus(dir / "corpus.jsonl", c.items);
    CHECK(load_corpus(dir / "corpus.jsonl") == c.items);
    std::ofstream(dir / "vectors.txt") << serialize_embeddings(c.words);
    const auto table = load_embeddings(dir / "vectors.txt", 100);
    CHECK(table.rows() == c.words.size() + kReservedRows);
    const auto direct = c.embedding_table();
    for (std::size_t i = 0; i < table.rows(); ++i) {
      const auto a = table.row(static_cast<int>(i)), b = direct.row(static_cast<int>(i));
      CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    std::filesystem::remove_all(dir);
  }
}

#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace marketsieve;

namespace {

Corpus product_posts(const std::string& forum, const std::vector<std::pair<std::string, int>>& products) {
  Corpus c;
  int n = 0;
  for (const auto& [word, times] : products)
    for (int i = 0; i < times; ++i)
      c.push_back(fixture::post(fixture::plain_doc({"selling " + word + " cheap"}, forum, "p" + std::to_string(n++)),
                                {1}));
  return c;
}

}  // namespace

TEST(Gazetteer, Threshold) {
  auto c = product_posts("darkode", {{"bots", 2}, {"bot", 2}, {"crypter", 3}, {"Accounts", 5}});
  auto g = build_gazetteer(c);
  EXPECT_EQ(g.entries, (std::set<std::string>{"account", "bot"}));
  EXPECT_EQ(g.forum, "darkode");
  EXPECT_TRUE(g.matches("BOTS"));
  EXPECT_FALSE(g.matches("crypters"));
  EXPECT_EQ(build_gazetteer(c, 3).size(), 3u);
}

TEST(Gazetteer, MonotoneInThreshold) {
  auto c = product_posts("f", {{"a1", 1}, {"b2", 2}, {"c3", 3}, {"d4", 4}, {"e5", 5}, {"f7", 7}});
  for (int k = 1; k < 8; ++k) {
    auto lo = build_gazetteer(c, k), hi = build_gazetteer(c, k + 1);
    EXPECT_TRUE(std::includes(lo.entries.begin(), lo.entries.end(), hi.entries.begin(), hi.entries.end()));
  }
}

TEST(Gazetteer, FileRoundTrip) {
  auto g = build_gazetteer(product_posts("darkode", {{"bots", 4}, {"logs", 4}}));
  std::stringstream ss;
  write_gazetteer(g, ss);
  auto back = read_gazetteer(ss);
  EXPECT_EQ(back.entries, g.entries);
  EXPECT_EQ(back.forum, "darkode");
  EXPECT_EQ(back.min_count, 4);
  std::istringstream bad("# marketsieve-gazetteer forum=x min_count=4\nbots\n");
  EXPECT_THROW(read_gazetteer(bad), ParseError);
  std::istringstream headless("bot\n");
  EXPECT_THROW(read_gazetteer(headless), ParseError);
}

TEST(Mix, SourcePlusTarget) {
  Corpus source, target;
  for (int i = 0; i < 700; ++i)
    source.push_back(fixture::post(fixture::plain_doc({"a bot"}, "hackforums", std::to_string(i)), {1}));
  for (int i = 0; i < 20; ++i)
    target.push_back(fixture::post(fixture::plain_doc({"a rat"}, "darkode", std::to_string(i)), {1}));
  auto mixed = mix_corpora(source, target);
  ASSERT_EQ(mixed.posts.size(), 720u);
  int heavy = 0;
  for (const auto& ap : mixed.posts) {
    if (ap.weight == 5.0) {
      ++heavy;
      EXPECT_EQ(ap.domain, "darkode");
    } else {
      EXPECT_EQ(ap.weight, 1.0);
    }
  }
  EXPECT_EQ(heavy, 20);

  auto alone = mix_corpora(source, {});
  ASSERT_EQ(alone.posts.size(), source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    EXPECT_EQ(alone.posts[i].doc, source[i].doc);
    EXPECT_EQ(alone.posts[i].gold, source[i].gold);
    EXPECT_EQ(alone.posts[i].weight, 1.0);
  }
  EXPECT_THROW(mix_corpora(source, source), InputError);
}

TEST(Mix, NoAugmentKeepsFeatureSpace) {
  auto source = product_posts("hackforums", {{"bot", 3}, {"crypter", 2}});
  auto target = product_posts("darkode", {{"rat", 2}});
  for (auto& ap : target) ap.doc.post.post_id = "t" + ap.doc.post.post_id;
  auto mixed = mix_corpora(source, target, 5.0, false);
  Corpus plain = source;
  plain.insert(plain.end(), target.begin(), target.end());
  auto a = train_binary(mixed.posts, Mode::token, {});
  auto b = train_binary(plain, Mode::token, {});
  EXPECT_EQ(a.vocab.names(), b.vocab.names());
}

TEST(TokenStream, OneSequencePerSentence) {
  Corpus c;
  c.push_back(fixture::post(fixture::plain_doc({"Selling Bots", "PM me"}), {}));
  auto s = token_stream(c);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], (std::vector<std::string>{"selling", "bots"}));
}

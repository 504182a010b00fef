#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace marketsieve;
using fixture::Sent;
using fixture::W;

namespace {

// Brute-force reimplementation: membership by walking each token's head
// chain, reach and extent recomputed from the kept set every round.
std::pair<int, int> oracle_extent(const std::vector<int>& heads, int h) {
  const int n = static_cast<int>(heads.size());
  auto child_of_h = [&](int t) {
    // the child of h on t's path to the root, or -1
    int prev = t, cur = heads[static_cast<std::size_t>(t)];
    for (int guard = 0; guard <= n && cur != -1; ++guard) {
      if (cur == h) return prev;
      prev = cur;
      cur = heads[static_cast<std::size_t>(cur)];
    }
    return -1;
  };
  std::set<int> kept;
  for (int t = 0; t < n; ++t)
    if (heads[static_cast<std::size_t>(t)] == h) kept.insert(t);
  while (true) {
    std::vector<int> members{h};
    for (int t = 0; t < n; ++t)
      if (t != h && kept.count(child_of_h(t))) members.push_back(t);
    int lo = *std::min_element(members.begin(), members.end());
    int hi = *std::max_element(members.begin(), members.end());
    if (hi - lo + 1 <= 7 && hi - lo + 1 == static_cast<int>(members.size())) return {lo, hi + 1};
    int worst = -1, worst_reach = -1, worst_hi = -1;
    for (int c : kept) {
      int clo = n, chi = -1;
      for (int t = 0; t < n; ++t)
        if (child_of_h(t) == c) {
          clo = std::min(clo, t);
          chi = std::max(chi, t);
        }
      int reach = std::max(std::abs(clo - h), std::abs(chi - h));
      if (reach > worst_reach || (reach == worst_reach && chi > worst_hi)) {
        worst = c;
        worst_reach = reach;
        worst_hi = chi;
      }
    }
    kept.erase(worst);
  }
}

Sent sentence_from(const std::vector<int>& heads, const std::vector<std::string>& tags) {
  Sent s;
  for (std::size_t i = 0; i < heads.size(); ++i) s.push_back({"w" + std::to_string(i), tags[i], heads[i]});
  return s;
}

}  // namespace

TEST(Project, BackconnectBot) {
  auto d = fixture::parsed_doc({{{"Looking", "VBG", -1, "root"},
                                 {"for", "IN", 0, "prep"},
                                 {"a", "DT", 5, "det"},
                                 {"solid", "JJ", 5, "amod"},
                                 {"Backconnect", "NN", 5, "nn"},
                                 {"bot", "NN", 1, "pobj"}}});
  Span s = project(d, 5);
  EXPECT_EQ(s.start, 2);
  EXPECT_EQ(s.end, 6);
  EXPECT_EQ(s.head, 5);

  auto d2 = fixture::parsed_doc({{{"Backconnect", "NNP", 1, "nn"}, {"bot", "NN", -1, "root"}}});
  Span s2 = project(d2, 1);
  EXPECT_EQ(s2.start, 0);
  EXPECT_EQ(s2.end, 2);
  EXPECT_EQ(s2.head, 1);
}

TEST(Project, NounWithoutDependentsAndNonNominal) {
  auto d = fixture::parsed_doc({{{"sell", "VB", -1, "root"}, {"logs", "NNS", 0, "dobj"}}});
  EXPECT_EQ(project(d, 1), (Span{0, 1, 2, 1}));
  EXPECT_EQ(project(d, 0), (Span{0, 0, 1, 0}));
}

TEST(Project, EightDependentsTrimmed) {
  std::vector<int> heads{4, 4, 4, 4, -1, 4, 4, 4, 4};
  std::vector<std::string> tags(9, "JJ");
  tags[4] = "NN";
  auto d = fixture::parsed_doc({sentence_from(heads, tags)});
  Span s = project(d, 4);
  EXPECT_EQ(s.start, 1);
  EXPECT_EQ(s.end, 8);
  auto [lo, hi] = oracle_extent(heads, 4);
  EXPECT_EQ(s.start, lo);
  EXPECT_EQ(s.end, hi);
}

TEST(Project, NonContiguousSubtreeTrimmed) {
  // "w3" depends on the noun but sits past a verb that is not in the subtree.
  std::vector<int> heads{1, 2, -1, 1};
  std::vector<std::string> tags{"JJ", "NN", "VB", "NN"};
  auto d = fixture::parsed_doc({sentence_from(heads, tags)});
  Span s = project(d, 1);
  EXPECT_EQ(s.start, 0);
  EXPECT_EQ(s.end, 2);
}

TEST(Project, MatchesOracleOnRandomTrees) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 13);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> heads(static_cast<std::size_t>(n));
    heads[static_cast<std::size_t>(order[0])] = -1;
    for (int k = 1; k < n; ++k)
      heads[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] =
          order[rng() % static_cast<unsigned>(k)];
    std::vector<std::string> tags;
    for (int i = 0; i < n; ++i) tags.push_back(rng() % 2 ? "NN" : "JJ");
    auto d = fixture::parsed_doc({sentence_from(heads, tags)});
    for (int i = 0; i < n; ++i) {
      Span s = project(d, i);
      EXPECT_LE(s.start, i);
      EXPECT_GT(s.end, i);
      EXPECT_LE(s.end - s.start, kMaxNounPhrase);
      EXPECT_EQ(s.head, i);
      if (tags[static_cast<std::size_t>(i)] == "NN") {
        auto [lo, hi] = oracle_extent(heads, i);
        EXPECT_EQ(s.start, lo) << "trial " << trial << " token " << i;
        EXPECT_EQ(s.end, hi) << "trial " << trial << " token " << i;
      } else {
        EXPECT_EQ(s.end - s.start, 1);
      }
    }
  }
}

TEST(Project, RequiresSyntax) {
  auto d = fixture::plain_doc({"a solid bot"});
  EXPECT_THROW(project(d, 2), ConfigError);
}

TEST(SpansMatch, HeadAnchored) {
  Span a{0, 2, 6, 5};
  EXPECT_TRUE(spans_match(a, a));
  EXPECT_TRUE(spans_match(a, Span{0, 5, 6, 5}));
  EXPECT_FALSE(spans_match(a, Span{0, 2, 6, 4}));
  EXPECT_FALSE(spans_match(a, Span{1, 2, 6, 5}));
}

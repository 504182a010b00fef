#include <gtest/gtest.h>

#include "support.hpp"

using namespace marketsieve;

TEST(Stem, KnownWords) {
  EXPECT_EQ(stem("Accounts"), "account");
  EXPECT_EQ(stem("bot"), "bot");
  EXPECT_EQ(stem("hacking"), "hack");
  EXPECT_EQ(stem("crypters"), "crypter");
  EXPECT_EQ(stem("cryptors"), "cryptor");
  EXPECT_EQ(stem("bots"), "bot");
  EXPECT_EQ(stem("caresses"), "caress");
  EXPECT_EQ(stem("ponies"), "poni");
  EXPECT_EQ(stem("relational"), "relat");
  EXPECT_EQ(stem(""), "");
}

TEST(Stem, SinglePassMatchesClassicPorter) {
  EXPECT_EQ(porter_stem("generalizations"), "gener");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("filing"), "file");
}

TEST(Stem, Idempotent) {
  for (const char* w : {"generalizations", "accounts", "hacking", "websites", "dumps", "servers", "tutorials",
                        "rdps", "logs", "crypters", "relational", "conditional", "happiness", "ssn"}) {
    const std::string s = stem(w);
    EXPECT_EQ(stem(s), s) << w;
  }
}

#pragma once

#include <set>
#include <string>
#include <vector>

#include "marketsieve/marketsieve.hpp"

namespace fixture {

using namespace marketsieve;

// form / tag / head (in-sentence, -1 root) / relation
struct W {
  std::string form;
  std::string tag;
  int head = -1;
  std::string rel = "dep";
};

using Sent = std::vector<W>;

// One sentence per body line.
inline Document parsed_doc(const std::vector<Sent>& sents, std::string forum = "f", std::string id = "p") {
  RawPost raw{std::move(forum), std::move(id), "", {}};
  std::vector<SyntaxSentence> syntax;
  for (const auto& s : sents) {
    std::string line;
    SyntaxSentence ss;
    for (const auto& w : s) {
      if (!line.empty()) line += ' ';
      line += w.form;
      ss.push_back({w.form, w.tag, w.head, w.rel});
    }
    raw.body_lines.push_back(line);
    syntax.push_back(std::move(ss));
  }
  return attach_syntax(tokenize(raw), syntax);
}

inline Document plain_doc(std::vector<std::string> lines, std::string forum = "f", std::string id = "p") {
  return tokenize(RawPost{std::move(forum), std::move(id), "", std::move(lines)});
}

inline AnnotationLayer layer(const std::set<int>& products, std::string who = "gold") {
  AnnotationLayer l;
  l.annotator_id = std::move(who);
  for (int i : products) l.products[i] = TradeTag::sell;
  return l;
}

inline AnnotatedPost post(Document doc, const std::set<int>& gold) {
  AnnotatedPost ap;
  ap.doc = std::move(doc);
  ap.layers.push_back(layer(gold, "a1"));
  ap.gold = layer(gold);
  ap.domain = ap.doc.post.forum_id;
  return ap;
}

inline int find_token(const Document& doc, const std::string& text, int from = 0) {
  for (int i = from; i < doc.size(); ++i)
    if (doc.tokens[static_cast<std::size_t>(i)].text == text) return i;
  return -1;
}

// Every product word contains "qzx", nothing else does.
inline Corpus separable_corpus() {
  const std::vector<std::string> verbs{"selling", "buying", "need", "want", "offering", "trading"};
  const std::vector<std::string> tails{"cheap", "fast", "now", "today", "here", "pm"};
  Corpus c;
  for (int i = 0; i < 12; ++i) {
    const std::string product = "qzx" + std::string(1, static_cast<char>('a' + i));
    auto doc = plain_doc({verbs[static_cast<std::size_t>(i % 6)] + " " + product + " " +
                                   tails[static_cast<std::size_t>((i * 5) % 6)] + " and more"},
                                  "f", "p" + std::to_string(i));
    c.push_back(post(std::move(doc), {1}));
  }
  return c;
}

// Some posts contain two gold tokens; the marker is shared by all of them.
inline Corpus latent_corpus() {
  Corpus c;
  for (int i = 0; i < 10; ++i) {
    std::string a = "qzx" + std::to_string(i), b = "qzx" + std::to_string(i + 10);
    auto doc = plain_doc({"hello friends " + a + " for sale and " + b + " too"}, "f", "p" + std::to_string(i));
    std::set<int> gold{2};
    if (i % 2) gold.insert(6);
    c.push_back(post(std::move(doc), gold));
  }
  return c;
}

// Braced market posts as (file name, text), products cycling over a small list.
inline std::vector<std::pair<std::string, std::string>> market_posts(int n, int offset = 0) {
  const std::vector<std::string> products{"bot", "crypter", "rat", "logs", "account", "rdp"};
  const std::vector<std::string> openers{"Selling", "Buying", "WTS", "WTB", "Need"};
  const std::vector<std::string> fillers{"cheap", "fast", "today", "legit", "fresh"};
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < n; ++i) {
    const int k = i + offset;
    const std::string& p = products[static_cast<std::size_t>(k % 6)];
    const std::string& q = products[static_cast<std::size_t>((k * 5 + 1) % 6)];
    std::string body = "TITLE: " + openers[static_cast<std::size_t>(k % 5)] + " {" + p + "} " +
                       fillers[static_cast<std::size_t>(k % 5)] + "\n" + "BODY: I have a good {" + p +
                       "} for you .\n" + "Price is " + std::to_string(10 + k) + "$ , pm me\n";
    if (k % 3 == 0) body += "Also a {" + q + "} if you want\n";
    out.emplace_back(std::string("post") + (k < 10 ? "0" : "") + std::to_string(k) + ".txt", body);
  }
  return out;
}

// Posts from the annotation guide's worked examples, braces included.
inline const std::vector<std::string>& guide_examples() {
  static const std::vector<std::string> kExamples = {
      "i am looking to buy USA {Dob} + {ssn} + {fname} + {lname} + {address}",
      "I am buying as many {email} : {passes} as possible.",
      "{Adbot}-{clickbot} {coder} needed.",
      "{WMZ} - [LR]\n1:1\nAround 200$",
      "Steal certain @yahoo {email} or facebook {account}\n"
      "i need a certian @yahoo {email} address {hacked} or an associated facebook {account}, paying good $$ if u "
      "can do this send me a pm for the info thanx",
      "{hack} {website}\nI pay 2000? via WesternUnion\nPM or add to MSN if interested.",
      "anyone have AE {logs} ?\nPm me , i need some {links} will pay 100$ each",
      "MySQLi {Dumper} is the best GUI {tool} dedicated to SQL injection attacks on MySQL.",
      "~250 .de {rdps}\n{servers} and xp, more {servers}, some 2008 {servers}, some windows 7, good speeds, mostly "
      "admin access\nmostly have usernames and passwords different than whats on the .ru markets",
      "{SQLi} and Admin {Login} for site with 4.8+ million users",
      "need small {hosting} space\ni need small {hosting} space (3-5gb) + one mysql {base} to host my php stealer - i "
      "wont host exe's or someother shits, only logs. post your price",
      "Buy complete c++ sources of svchost {injection} and AV {bypass}\nHi.\nI need you c++ sources - completed, "
      "tested and good commented.\nNeed work and stable AV {bypass} code in usermode, for example undetectable "
      "svchost process injection.",
      "Logo for the [app] 5 $",
      "a [method] for making money",
      "[hack] a big [website]",
      "I want a coder to [write] an [exploit]",
      "[FaceSpread] / / Custom Panel / / HTTP crypter and more !",
      "Facebook [accounts]",
      "Phone [Verification] Service",
      "YouTube Multi Account [Subscriber] Bot",
  };
  return kExamples;
}

// Removes every bracket marker, leaving the text an annotator saw.
inline std::string strip_markers(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '{' && i + 2 < s.size() && (s[i + 1] == 'S' || s[i + 1] == 'B') && s[i + 2] == ' ') {
      i += 2;
      continue;
    }
    if (c == '{' || c == '}' || c == '[' || c == ']') continue;
    out += c;
  }
  return out;
}

}  // namespace fixture

#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "marketsieve/brown.hpp"
#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/stemmer.hpp"

namespace marketsieve {

inline constexpr double kTargetDomainWeight = 5.0;

struct Gazetteer {
  std::set<std::string> entries;  // stemmed, lowercased
  std::string forum;
  int min_count = 4;

  bool contains_stem(const std::string& s) const { return entries.count(s) != 0; }
  bool matches(std::string_view word) const { return contains_stem(stem(word)); }
  std::size_t size() const { return entries.size(); }
};

// Product stems occurring at least min_count times among gold annotations.
inline Gazetteer build_gazetteer(const Corpus& corpus, int min_count = 4, std::string forum = {}) {
  std::map<std::string, int> counts;
  for (const auto& ap : corpus) {
    if (!ap.gold) continue;
    for (const auto& [i, tag] : ap.gold->products) ++counts[stem(ap.doc.tokens[static_cast<std::size_t>(i)].text)];
    if (forum.empty()) forum = ap.doc.post.forum_id;
  }
  Gazetteer g;
  g.forum = std::move(forum);
  g.min_count = min_count;
  for (const auto& [s, c] : counts)
    if (c >= min_count) g.entries.insert(s);
  return g;
}

inline void write_gazetteer(const Gazetteer& g, std::ostream& out) {
  out << "# marketsieve-gazetteer forum=" << g.forum << " min_count=" << g.min_count << '\n';
  for (const auto& e : g.entries) out << e << '\n';
}

inline Gazetteer read_gazetteer(std::istream& in) {
  Gazetteer g;
  std::string line;
  if (!std::getline(in, line) || !text::starts_with(line, "# marketsieve-gazetteer"))
    throw ParseError(1, "missing gazetteer header");
  for (const auto& field : text::split_whitespace(line)) {
    if (text::starts_with(field, "forum=")) g.forum = field.substr(6);
    if (text::starts_with(field, "min_count=")) g.min_count = std::stoi(field.substr(10));
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = std::string(text::trim(line));
    if (t.empty()) continue;
    if (t != stem(t)) throw ParseError(lineno, "gazetteer entry '" + t + "' is not a stem");
    g.entries.insert(t);
  }
  return g;
}

struct MixedCorpus {
  Corpus posts;
  bool augment = false;
};

// Source posts carry weight 1 and target posts target_weight; every post's
// domain label is its forum id.
inline MixedCorpus mix_corpora(const Corpus& source, const Corpus& target,
                               double target_weight = kTargetDomainWeight, bool augment = false) {
  std::set<std::pair<std::string, std::string>> seen;
  MixedCorpus out;
  out.augment = augment;
  auto add = [&](const AnnotatedPost& ap, double w) {
    auto key = std::make_pair(ap.doc.post.forum_id, ap.doc.post.post_id);
    if (!seen.insert(key).second)
      throw InputError("duplicate post " + key.first + "/" + key.second + " when mixing corpora");
    AnnotatedPost copy = ap;
    copy.weight = w;
    copy.domain = ap.doc.post.forum_id;
    if (augment && copy.domain.empty())
      throw InputError("post " + key.second + " has no forum id to use as a domain label");
    out.posts.push_back(std::move(copy));
  };
  for (const auto& ap : source) add(ap, 1.0);
  for (const auto& ap : target) add(ap, target_weight);
  return out;
}

// Lowercased token sequences (one per sentence) for clustering.
inline std::vector<std::vector<std::string>> token_stream(const Corpus& corpus) {
  std::vector<std::vector<std::string>> seqs;
  for (const auto& ap : corpus)
    for (const auto& s : ap.doc.sentences) {
      std::vector<std::string> seq;
      for (int i = s.begin; i < s.end; ++i) seq.push_back(ap.doc.tokens[static_cast<std::size_t>(i)].lower);
      seqs.push_back(std::move(seq));
    }
  return seqs;
}

}  // namespace marketsieve

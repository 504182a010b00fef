#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "marketsieve/adaptation.hpp"
#include "marketsieve/brown.hpp"
#include "marketsieve/corpus.hpp"
#include "marketsieve/projection.hpp"

// Feature keys are plain strings so model files stay readable:
//
//   SPOS=<b>          bucketed sentence position in the document
//   WPOS=<b>          bucketed word position in the sentence
//   W<o>=<word>       lowercased word at offset o in {-1,0,+1}, common words only
//   P<o>=<tag>        POS tag at offset o (MISSING without syntax)
//   D<o>=<rel>        dependency relation at offset o (MISSING without syntax)
//                     off the sentence edge W/P/D emit BOS or EOS
//   C3=<gram>         character 3-grams of "^word$"
//   BC<k>|<bits>      Brown cluster id prefixes; BC|UNK when unclustered
//   INGAZ             stemmed word is in the gazetteer
//
// Token classifiers prefix these with SELF| and PARENT| (PARENT|ROOT for
// roots); phrase classifiers with FIRST|, LAST|, HEAD| and PARENT|.
// Domain augmentation adds "<domain>##<key>" beside every key.
namespace marketsieve {

struct FeatureConfig {
  int common_word_min_count = 5;
  // Lower edges of the position buckets: {0, 1, 2, 3-5, 6-10, 11+}.
  std::vector<int> position_buckets{0, 1, 2, 3, 6, 11};
  int char_ngram_n = 3;
  bool use_brown = false;
  std::vector<int> brown_prefixes{2, 4, 6};
  bool use_gazetteer = false;
  bool domain_augment = false;

  bool operator==(const FeatureConfig&) const = default;
};

// Feature-string index plus the training word counts behind the
// common-word test. Once frozen, unseen strings are dropped.
class Vocabulary {
 public:
  std::optional<int> lookup(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<int> intern(const std::string& key) {
    if (auto found = lookup(key)) return found;
    if (frozen_) return std::nullopt;
    int id = static_cast<int>(names_.size());
    index_.emplace(key, id);
    names_.push_back(key);
    return id;
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
  const std::vector<std::string>& names() const { return names_; }

  void count_word(const std::string& lower, long n = 1) { word_counts_[lower] += n; }
  long word_count(const std::string& lower) const {
    auto it = word_counts_.find(lower);
    return it == word_counts_.end() ? 0 : it->second;
  }
  const std::map<std::string, long>& word_counts() const { return word_counts_; }

  bool operator==(const Vocabulary& o) const {
    return names_ == o.names_ && frozen_ == o.frozen_ && word_counts_ == o.word_counts_;
  }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> names_;
  bool frozen_ = false;
  std::map<std::string, long> word_counts_;
};

// Sorted by index, no duplicates.
struct FeatureVector {
  std::vector<std::pair<int, double>> entries;

  std::size_t size() const { return entries.size(); }
  double dot(const std::vector<double>& w) const {
    double s = 0.0;
    for (const auto& [i, v] : entries) s += w[static_cast<std::size_t>(i)] * v;
    return s;
  }
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureResources {
  const ClusterHierarchy* clusters = nullptr;
  const Gazetteer* gazetteer = nullptr;
};

inline std::string position_bucket(int value, const std::vector<int>& edges) {
  std::size_t k = 0;
  while (k + 1 < edges.size() && value >= edges[k + 1]) ++k;
  int lo = edges[k];
  if (k + 1 == edges.size()) return std::to_string(lo) + "+";
  int hi = edges[k + 1] - 1;
  return lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
}

inline std::vector<std::string> char_ngrams(const std::string& word, int n) {
  std::string padded = "^" + word + "$";
  std::vector<std::string> out;
  if (static_cast<int>(padded.size()) < n) {
    out.push_back(padded);
    return out;
  }
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= padded.size(); ++i)
    out.push_back(padded.substr(i, static_cast<std::size_t>(n)));
  return out;
}

// Prefixes of the word's cluster id; prefixes that collapse to the same
// string (ids shorter than a prefix length) are emitted once.
inline std::vector<std::string> brown_features(const std::string& word, const ClusterHierarchy& hierarchy,
                                               const std::vector<int>& prefixes = {2, 4, 6}) {
  const std::string* bits = hierarchy.id(text::to_lower(word));
  if (!bits) return {"BC|UNK"};
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (int k : prefixes) {
    std::string p = bits->substr(0, static_cast<std::size_t>(k));
    if (std::find(seen.begin(), seen.end(), p) != seen.end()) continue;
    seen.push_back(p);
    out.push_back("BC" + std::to_string(k) + "|" + p);
  }
  return out;
}

inline std::vector<std::string> base_features(const Document& doc, int i, const Vocabulary& vocab,
                                              const FeatureConfig& cfg, const FeatureResources& res = {}) {
  const Token& tok = doc.tokens[static_cast<std::size_t>(i)];
  const Sentence& sent = doc.sentence_of(i);
  std::vector<std::string> f;
  f.push_back("SPOS=" + position_bucket(tok.sent_index, cfg.position_buckets));
  f.push_back("WPOS=" + position_bucket(tok.pos_in_sent, cfg.position_buckets));
  for (int off : {-1, 0, 1}) {
    const std::string o = off < 0 ? "-1" : (off == 0 ? "0" : "+1");
    const int j = i + off;
    if (j < sent.begin || j >= sent.end) {
      const char* edge = off < 0 ? "BOS" : "EOS";
      f.push_back("W" + o + "=" + edge);
      f.push_back("P" + o + "=" + edge);
      f.push_back("D" + o + "=" + edge);
      continue;
    }
    const Token& t = doc.tokens[static_cast<std::size_t>(j)];
    if (vocab.word_count(t.lower) >= cfg.common_word_min_count) f.push_back("W" + o + "=" + t.lower);
    f.push_back("P" + o + "=" + t.pos_tag.value_or("MISSING"));
    f.push_back("D" + o + "=" + t.deprel.value_or("MISSING"));
  }
  for (auto& g : char_ngrams(tok.lower, cfg.char_ngram_n)) f.push_back("C3=" + g);
  if (cfg.use_brown) {
    if (!res.clusters) throw ConfigError("Brown cluster features enabled but no clusters supplied");
    for (auto& b : brown_features(tok.lower, *res.clusters, cfg.brown_prefixes)) f.push_back(std::move(b));
  }
  if (cfg.use_gazetteer) {
    if (!res.gazetteer) throw ConfigError("gazetteer features enabled but no gazetteer supplied");
    if (res.gazetteer->matches(tok.lower)) f.push_back("INGAZ");
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

namespace detail {

inline void append_prefixed(std::vector<std::string>& out, const std::string& prefix,
                            const std::vector<std::string>& keys) {
  for (const auto& k : keys) out.push_back(prefix + k);
}

inline void append_parent(std::vector<std::string>& out, const Document& doc, int i, const Vocabulary& vocab,
                          const FeatureConfig& cfg, const FeatureResources& res) {
  const Token& t = doc.tokens[static_cast<std::size_t>(i)];
  if (!t.head) {
    out.push_back("PARENT|MISSING");
  } else if (auto p = doc.parent(i)) {
    append_prefixed(out, "PARENT|", base_features(doc, *p, vocab, cfg, res));
  } else {
    out.push_back("PARENT|ROOT");
  }
}

inline std::vector<std::string> finish(std::vector<std::string> f) {
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

}  // namespace detail

inline std::vector<std::string> token_features(const Document& doc, int i, const Vocabulary& vocab,
                                               const FeatureConfig& cfg, const FeatureResources& res = {}) {
  std::vector<std::string> f;
  detail::append_prefixed(f, "SELF|", base_features(doc, i, vocab, cfg, res));
  detail::append_parent(f, doc, i, vocab, cfg, res);
  return detail::finish(std::move(f));
}

inline std::vector<std::string> np_features(const Document& doc, const Span& span, const Vocabulary& vocab,
                                            const FeatureConfig& cfg, const FeatureResources& res = {}) {
  std::vector<std::string> f;
  detail::append_prefixed(f, "FIRST|", base_features(doc, span.start, vocab, cfg, res));
  detail::append_prefixed(f, "LAST|", base_features(doc, span.end - 1, vocab, cfg, res));
  detail::append_prefixed(f, "HEAD|", base_features(doc, span.head, vocab, cfg, res));
  detail::append_parent(f, doc, span.head, vocab, cfg, res);
  return detail::finish(std::move(f));
}

inline std::vector<std::string> augment_domains(const std::vector<std::string>& keys, const std::string& domain) {
  if (domain.empty()) throw std::invalid_argument("augment_domains: empty domain label");
  std::vector<std::string> out = keys;
  out.reserve(keys.size() * 2);
  for (const auto& k : keys) out.push_back(domain + "##" + k);
  return out;
}

// Grows the vocabulary unless it is frozen.
inline FeatureVector vectorize(const std::vector<std::string>& keys, Vocabulary& vocab) {
  FeatureVector fv;
  for (const auto& k : keys)
    if (auto id = vocab.intern(k)) fv.entries.emplace_back(*id, 1.0);
  std::sort(fv.entries.begin(), fv.entries.end());
  fv.entries.erase(std::unique(fv.entries.begin(), fv.entries.end(),
                               [](const auto& a, const auto& b) { return a.first == b.first; }),
                   fv.entries.end());
  return fv;
}

inline FeatureVector vectorize(const std::vector<std::string>& keys, const Vocabulary& vocab) {
  FeatureVector fv;
  for (const auto& k : keys)
    if (auto id = vocab.lookup(k)) fv.entries.emplace_back(*id, 1.0);
  std::sort(fv.entries.begin(), fv.entries.end());
  fv.entries.erase(std::unique(fv.entries.begin(), fv.entries.end(),
                               [](const auto& a, const auto& b) { return a.first == b.first; }),
                   fv.entries.end());
  return fv;
}

}  // namespace marketsieve

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/projection.hpp"
#include "marketsieve/stemmer.hpp"

namespace marketsieve {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp_pred = 0;  // predictions that are correct
  long n_pred = 0;
  long tp_gold = 0;  // gold units that are recovered
  long n_gold = 0;
  bool no_predictions = false;  // precision undefined, reported as 0

  bool operator==(const PRF&) const = default;
};

inline double harmonic_mean(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

inline PRF make_prf(long tp_pred, long n_pred, long tp_gold, long n_gold) {
  PRF m;
  m.tp_pred = tp_pred;
  m.n_pred = n_pred;
  m.tp_gold = tp_gold;
  m.n_gold = n_gold;
  m.no_predictions = n_pred == 0;
  m.precision = n_pred > 0 ? static_cast<double>(tp_pred) / static_cast<double>(n_pred) : 0.0;
  m.recall = n_gold > 0 ? static_cast<double>(tp_gold) / static_cast<double>(n_gold) : 0.0;
  m.f1 = harmonic_mean(m.precision, m.recall);
  return m;
}

// Token (or phrase-head) indices per post.
using UnitSet = std::set<int>;

inline PRF token_prf(const std::vector<UnitSet>& pred, const std::vector<UnitSet>& gold) {
  if (pred.size() != gold.size())
    throw AlignmentError("prediction and gold corpora have different post counts (" + std::to_string(pred.size()) +
                         " vs " + std::to_string(gold.size()) + ")");
  long tp = 0, np = 0, ng = 0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    np += static_cast<long>(pred[p].size());
    ng += static_cast<long>(gold[p].size());
    for (int u : pred[p]) tp += gold[p].count(u) ? 1 : 0;
  }
  return make_prf(tp, np, tp, ng);
}

// ---------------------------------------------------------------------------
// Type matching

inline int levenshtein(std::string_view a, std::string_view b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline int type_match_threshold(std::size_t length) {
  if (length <= 4) return 0;
  if (length <= 7) return 1;
  return 2;
}

// Stems are compared; the threshold uses the longer stem. Symmetric and
// reflexive but not transitive.
inline bool types_match(std::string_view a, std::string_view b) {
  const std::string sa = stem(a), sb = stem(b);
  return levenshtein(sa, sb) <= type_match_threshold(std::max(sa.size(), sb.size()));
}

// Greedy left to right: a type is kept unless it matches one already kept.
inline std::vector<std::string> canonicalize_types(const std::vector<std::string>& types) {
  std::vector<std::string> kept;
  for (const auto& t : types)
    if (std::none_of(kept.begin(), kept.end(), [&](const std::string& k) { return types_match(k, t); }))
      kept.push_back(t);
  return kept;
}

enum class Averaging { micro, macro };

struct TypeTally {
  long tp_pred = 0, n_pred = 0, tp_gold = 0, n_gold = 0;
};

inline TypeTally type_tally(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  const auto p = canonicalize_types(pred);
  const auto g = canonicalize_types(gold);
  TypeTally t;
  t.n_pred = static_cast<long>(p.size());
  t.n_gold = static_cast<long>(g.size());
  for (const auto& x : p)
    if (std::any_of(g.begin(), g.end(), [&](const std::string& y) { return types_match(x, y); })) ++t.tp_pred;
  for (const auto& y : g)
    if (std::any_of(p.begin(), p.end(), [&](const std::string& x) { return types_match(x, y); })) ++t.tp_gold;
  return t;
}

// Macro averaging means per-post precision over posts with predictions and
// per-post recall over posts with gold types; the counts stay micro.
inline PRF type_prf(const std::vector<std::vector<std::string>>& pred,
                    const std::vector<std::vector<std::string>>& gold, Averaging avg = Averaging::micro) {
  if (pred.size() != gold.size()) throw AlignmentError("prediction and gold corpora have different post counts");
  TypeTally sum;
  double p_sum = 0, r_sum = 0;
  long p_posts = 0, r_posts = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    auto t = type_tally(pred[i], gold[i]);
    sum.tp_pred += t.tp_pred;
    sum.n_pred += t.n_pred;
    sum.tp_gold += t.tp_gold;
    sum.n_gold += t.n_gold;
    if (t.n_pred > 0) {
      p_sum += static_cast<double>(t.tp_pred) / static_cast<double>(t.n_pred);
      ++p_posts;
    }
    if (t.n_gold > 0) {
      r_sum += static_cast<double>(t.tp_gold) / static_cast<double>(t.n_gold);
      ++r_posts;
    }
  }
  PRF m = make_prf(sum.tp_pred, sum.n_pred, sum.tp_gold, sum.n_gold);
  if (avg == Averaging::macro) {
    m.precision = p_posts ? p_sum / static_cast<double>(p_posts) : 0.0;
    m.recall = r_posts ? r_sum / static_cast<double>(r_posts) : 0.0;
    m.f1 = harmonic_mean(m.precision, m.recall);
  }
  return m;
}

struct Accuracy {
  double value = 0.0;
  long correct = 0;
  long scored = 0;

  bool operator==(const Accuracy&) const = default;
};

// Over posts with at least one gold type; no prediction counts as wrong.
inline Accuracy post_accuracy(const std::vector<std::optional<std::string>>& first,
                              const std::vector<std::vector<std::string>>& gold) {
  if (first.size() != gold.size()) throw AlignmentError("prediction and gold corpora have different post counts");
  Accuracy a;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (gold[i].empty()) continue;
    ++a.scored;
    if (first[i] && std::any_of(gold[i].begin(), gold[i].end(),
                                [&](const std::string& g) { return types_match(*first[i], g); }))
      ++a.correct;
  }
  if (a.scored == 0) throw InputError("post accuracy: no post has a gold product");
  a.value = static_cast<double>(a.correct) / static_cast<double>(a.scored);
  return a;
}

// ---------------------------------------------------------------------------
// Corpus-level glue: predictions are spans, matched by head token.

inline UnitSet span_heads(const Document& doc, const std::vector<Span>& spans) {
  UnitSet out;
  for (const auto& s : spans)
    if (doc.in_scope(s.head)) out.insert(s.head);
  return out;
}

inline UnitSet gold_units(const AnnotatedPost& ap) {
  UnitSet out;
  if (ap.gold)
    for (const auto& [i, tag] : ap.gold->products)
      if (ap.doc.in_scope(i)) out.insert(i);
  return out;
}

inline std::vector<std::string> unit_types(const Document& doc, const UnitSet& units) {
  std::vector<std::string> out;
  for (int i : units) out.push_back(doc.tokens[static_cast<std::size_t>(i)].text);
  return out;
}

// Earliest prediction in document order.
inline std::optional<int> first_unit(const Document& doc, const std::vector<Span>& spans) {
  std::optional<int> best;
  std::optional<std::pair<int, int>> key;
  for (const auto& s : spans) {
    if (!doc.in_scope(s.head)) continue;
    auto k = std::make_pair(s.start, s.head);
    if (!key || k < *key) {
      key = k;
      best = s.head;
    }
  }
  return best;
}

struct OovReport {
  double oov_rate = 0.0;
  long n_gold = 0;
  long n_oov = 0;
  std::optional<double> r_seen;  // empty when there are no seen gold tokens
  std::optional<double> r_oov;   // empty when there are no unseen gold tokens

  bool operator==(const OovReport&) const = default;
};

inline std::set<std::string> gold_stems(const Corpus& corpus) {
  std::set<std::string> out;
  for (const auto& ap : corpus)
    if (ap.gold)
      for (const auto& [i, tag] : ap.gold->products) out.insert(stem(ap.doc.tokens[static_cast<std::size_t>(i)].text));
  return out;
}

inline OovReport oov_decompose(const Corpus& train, const Corpus& eval, const std::vector<std::vector<Span>>& preds) {
  if (eval.size() != preds.size()) throw AlignmentError("prediction and gold corpora have different post counts");
  const auto seen = gold_stems(train);
  OovReport r;
  long seen_n = 0, seen_hit = 0, oov_hit = 0;
  for (std::size_t p = 0; p < eval.size(); ++p) {
    const auto& doc = eval[p].doc;
    const auto pred = span_heads(doc, preds[p]);
    for (int i : gold_units(eval[p])) {
      ++r.n_gold;
      const bool hit = pred.count(i) != 0;
      if (seen.count(stem(doc.tokens[static_cast<std::size_t>(i)].text))) {
        ++seen_n;
        seen_hit += hit;
      } else {
        ++r.n_oov;
        oov_hit += hit;
      }
    }
  }
  if (r.n_gold > 0) r.oov_rate = static_cast<double>(r.n_oov) / static_cast<double>(r.n_gold);
  if (seen_n > 0) r.r_seen = static_cast<double>(seen_hit) / static_cast<double>(seen_n);
  if (r.n_oov > 0) r.r_oov = static_cast<double>(oov_hit) / static_cast<double>(r.n_oov);
  return r;
}

struct EvalReport {
  PRF token_prf;
  PRF type_prf;
  std::optional<Accuracy> post_accuracy;  // empty when no post has gold
  long n_posts_scored = 0;
  std::optional<OovReport> oov;
};

inline EvalReport evaluate(const Corpus& gold, const std::vector<std::vector<Span>>& preds,
                           Averaging avg = Averaging::micro, const Corpus* train_for_oov = nullptr) {
  if (gold.size() != preds.size())
    throw AlignmentError("prediction and gold corpora have different post counts (" + std::to_string(preds.size()) +
                         " vs " + std::to_string(gold.size()) + ")");
  std::vector<UnitSet> pu, gu;
  std::vector<std::vector<std::string>> pt, gt;
  std::vector<std::optional<std::string>> first;
  for (std::size_t p = 0; p < gold.size(); ++p) {
    const auto& doc = gold[p].doc;
    pu.push_back(span_heads(doc, preds[p]));
    gu.push_back(gold_units(gold[p]));
    pt.push_back(unit_types(doc, pu.back()));
    gt.push_back(unit_types(doc, gu.back()));
    auto f = first_unit(doc, preds[p]);
    first.push_back(f ? std::optional<std::string>(doc.tokens[static_cast<std::size_t>(*f)].text) : std::nullopt);
  }
  EvalReport r;
  r.token_prf = token_prf(pu, gu);
  r.type_prf = type_prf(pt, gt, avg);
  if (std::any_of(gt.begin(), gt.end(), [](const auto& g) { return !g.empty(); })) {
    r.post_accuracy = post_accuracy(first, gt);
    r.n_posts_scored = r.post_accuracy->scored;
  }
  if (train_for_oov) r.oov = oov_decompose(*train_for_oov, gold, preds);
  return r;
}

// ---------------------------------------------------------------------------
// Paired bootstrap

enum class BootstrapMetric { token_f1, type_f1, post_accuracy };

// Per-post counts; for accuracy, tp_pred is 1 when correct and n_pred is 1
// for every scored post.
struct PostTally {
  long tp_pred = 0, n_pred = 0, tp_gold = 0, n_gold = 0;
};

struct PairedPost {
  std::string key;
  PostTally a;
  PostTally b;
};

inline double tally_metric(BootstrapMetric metric, const PostTally& t) {
  if (metric == BootstrapMetric::post_accuracy)
    return t.n_pred > 0 ? static_cast<double>(t.tp_pred) / static_cast<double>(t.n_pred) : 0.0;
  return make_prf(t.tp_pred, t.n_pred, t.tp_gold, t.n_gold).f1;
}

inline std::vector<PairedPost> paired_tallies(BootstrapMetric metric, const Corpus& gold,
                                              const std::vector<std::vector<Span>>& a,
                                              const std::vector<std::vector<Span>>& b) {
  if (a.size() != gold.size() || b.size() != gold.size())
    throw AlignmentError("prediction files and gold corpus have different post counts");
  auto tally = [&](const AnnotatedPost& ap, const std::vector<Span>& spans) {
    const auto& doc = ap.doc;
    const auto pu = span_heads(doc, spans);
    const auto gu = gold_units(ap);
    PostTally t;
    if (metric == BootstrapMetric::token_f1) {
      t.n_pred = static_cast<long>(pu.size());
      t.n_gold = static_cast<long>(gu.size());
      for (int u : pu) t.tp_pred += gu.count(u) ? 1 : 0;
      t.tp_gold = t.tp_pred;
    } else if (metric == BootstrapMetric::type_f1) {
      auto tt = type_tally(unit_types(doc, pu), unit_types(doc, gu));
      t = {tt.tp_pred, tt.n_pred, tt.tp_gold, tt.n_gold};
    } else if (!gu.empty()) {
      t.n_pred = 1;
      auto f = first_unit(doc, spans);
      const auto gt = unit_types(doc, gu);
      if (f && std::any_of(gt.begin(), gt.end(), [&](const std::string& g) {
            return types_match(doc.tokens[static_cast<std::size_t>(*f)].text, g);
          }))
        t.tp_pred = 1;
    }
    return t;
  };
  std::vector<PairedPost> out;
  for (std::size_t p = 0; p < gold.size(); ++p)
    out.push_back({gold[p].doc.post.forum_id + "/" + gold[p].doc.post.post_id, tally(gold[p], a[p]), tally(gold[p], b[p])});
  return out;
}

// p = fraction of resamples in which A's metric does not exceed B's. Posts
// are ordered by key before resampling so the result does not depend on the
// order they were supplied in.
inline double bootstrap_test(BootstrapMetric metric, std::vector<PairedPost> posts, int resamples = 10000,
                             std::uint64_t seed = 0) {
  if (posts.size() < 2) throw InputError("bootstrap test needs at least 2 posts");
  if (resamples < 1) throw ConfigError("bootstrap resample count must be positive");
  std::sort(posts.begin(), posts.end(), [](const auto& x, const auto& y) { return x.key < y.key; });
  for (std::size_t i = 1; i < posts.size(); ++i)
    if (posts[i].key == posts[i - 1].key) throw InputError("duplicate post key '" + posts[i].key + "' in bootstrap");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, posts.size() - 1);
  long not_better = 0;
  for (int r = 0; r < resamples; ++r) {
    PostTally sa, sb;
    for (std::size_t k = 0; k < posts.size(); ++k) {
      const auto& pp = posts[pick(rng)];
      sa.tp_pred += pp.a.tp_pred;
      sa.n_pred += pp.a.n_pred;
      sa.tp_gold += pp.a.tp_gold;
      sa.n_gold += pp.a.n_gold;
      sb.tp_pred += pp.b.tp_pred;
      sb.n_pred += pp.b.n_pred;
      sb.tp_gold += pp.b.tp_gold;
      sb.n_gold += pp.b.n_gold;
    }
    if (tally_metric(metric, sa) - tally_metric(metric, sb) <= 0.0) ++not_better;
  }
  return static_cast<double>(not_better) / static_cast<double>(resamples);
}

}  // namespace marketsieve

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "marketsieve/adaptation.hpp"
#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/features.hpp"
#include "marketsieve/projection.hpp"
#include "marketsieve/stemmer.hpp"

namespace marketsieve {

enum class Mode { token, np, post_token, post_np };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::token: return "token";
    case Mode::np: return "np";
    case Mode::post_token: return "post-token";
    case Mode::post_np: return "post-np";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "token") return Mode::token;
  if (s == "np") return Mode::np;
  if (s == "post-token") return Mode::post_token;
  if (s == "post-np") return Mode::post_np;
  throw ConfigError("unknown mode '" + s + "' (expected token, np, post-token or post-np)");
}

inline bool uses_phrases(Mode m) { return m == Mode::np || m == Mode::post_np; }
inline bool is_post_level(Mode m) { return m == Mode::post_token || m == Mode::post_np; }

struct TrainConfig {
  int iterations = 5;
  double l1_strength = 1e-5;
  double adagrad_eta = 0.1;
  double adagrad_delta = 1e-6;
  double cost_fp = 1.0;
  double cost_fn = 1.0;
  double singleton_weight = 3.0;
  double target_domain_weight = kTargetDomainWeight;
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 1) throw ConfigError("iterations must be positive");
    if (l1_strength < 0) throw ConfigError("l1_strength must be non-negative");
    if (adagrad_eta <= 0 || adagrad_delta <= 0) throw ConfigError("AdaGrad eta and delta must be positive");
    if (cost_fp <= 0 || cost_fn <= 0) throw ConfigError("misclassification costs must be positive");
    if (singleton_weight < 1) throw ConfigError("singleton_weight must be at least 1");
    if (target_domain_weight <= 0) throw ConfigError("target_domain_weight must be positive");
  }

  bool operator==(const TrainConfig&) const = default;
};

// Diagonal AdaGrad with an L1 proximal step. Coordinates that a step does
// not touch are brought up to date lazily: consecutive soft-thresholds with
// an unchanged accumulator compose additively, so catching up k steps is one
// soft-threshold by k * eta * lambda / H_j.
class AdaGradL1 {
 public:
  AdaGradL1(std::size_t dim, double eta, double delta, double l1)
      : w_(dim, 0.0), sum_sq_(dim, 0.0), last_(dim, 0), eta_(eta), delta_(delta), l1_(l1) {}

  void begin_step() { ++step_; }

  // Applies the shrinkage owed for steps before the current one.
  void catch_up(int j) {
    auto k = static_cast<std::size_t>(j);
    const std::uint64_t owed = step_ - 1 - last_[k];
    if (owed > 0) {
      w_[k] = soft_threshold(w_[k], static_cast<double>(owed) * eta_ * l1_ / scale(k));
      last_[k] = step_ - 1;
    }
  }

  void catch_up(const FeatureVector& fv) {
    for (const auto& [j, v] : fv.entries) catch_up(j);
  }

  // Gradient component g for coordinate j at the current step; the caller
  // has already caught j up.
  void apply(int j, double g) {
    auto k = static_cast<std::size_t>(j);
    sum_sq_[k] += g * g;
    const double h = scale(k);
    w_[k] = soft_threshold(w_[k] - eta_ * g / h, eta_ * l1_ / h);
    last_[k] = step_;
  }

  // Brings every coordinate up to the current step.
  void finish() {
    for (std::size_t k = 0; k < w_.size(); ++k) {
      const std::uint64_t owed = step_ - last_[k];
      if (owed > 0) w_[k] = soft_threshold(w_[k], static_cast<double>(owed) * eta_ * l1_ / scale(k));
      last_[k] = step_;
    }
  }

  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& sum_squares() const { return sum_sq_; }
  std::uint64_t step() const { return step_; }

  static double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
  }

 private:
  double scale(std::size_t k) const { return delta_ + std::sqrt(sum_sq_[k]); }

  std::vector<double> w_;
  std::vector<double> sum_sq_;
  std::vector<std::uint64_t> last_;
  std::uint64_t step_ = 0;
  double eta_;
  double delta_;
  double l1_;
};

struct LinearModel {
  Mode mode = Mode::token;
  TrainConfig train;
  FeatureConfig features;
  Vocabulary vocab;
  std::vector<double> weights;

  double score(const FeatureVector& fv) const { return fv.dot(weights); }
  bool operator==(const LinearModel&) const = default;
};

// Candidate units of a post: every scope-eligible token, projected to a
// phrase in the phrase modes.
inline std::vector<Span> candidate_spans(const Document& doc, Mode mode) {
  std::vector<Span> out;
  for (int i = 0; i < doc.size(); ++i) {
    if (!doc.in_scope(i)) continue;
    out.push_back(uses_phrases(mode) ? project(doc, i) : single_token_span(doc, i));
  }
  return out;
}

inline std::vector<std::string> candidate_keys(const Document& doc, const Span& span, Mode mode,
                                               const Vocabulary& vocab, const FeatureConfig& cfg,
                                               const FeatureResources& res, const std::string& domain) {
  auto keys = uses_phrases(mode) ? np_features(doc, span, vocab, cfg, res)
                                 : token_features(doc, span.head, vocab, cfg, res);
  if (cfg.domain_augment) keys = augment_domains(keys, domain);
  return keys;
}

namespace detail {

struct Candidate {
  Span span;
  FeatureVector fv;
  bool gold = false;
};

struct PreparedPost {
  std::vector<Candidate> cands;
  double weight = 1.0;
};

inline std::string domain_of(const AnnotatedPost& ap) {
  return ap.domain.empty() ? ap.doc.post.forum_id : ap.domain;
}

inline void check_training_corpus(const Corpus& corpus, Mode mode) {
  if (corpus.empty()) throw InputError("training corpus is empty");
  for (const auto& ap : corpus) {
    if (!ap.gold) throw InputError("post " + ap.doc.post.post_id + " has no merged gold annotation");
    if (uses_phrases(mode) && !ap.doc.has_syntax)
      throw InputError("post " + ap.doc.post.post_id + " has no syntax; mode " + to_string(mode) + " requires it");
  }
}

// Builds the vocabulary over the training candidates, freezes it, and
// returns the vectorized posts.
inline std::vector<PreparedPost> prepare(const Corpus& corpus, Mode mode, const FeatureConfig& cfg,
                                         const FeatureResources& res, Vocabulary& vocab) {
  for (const auto& ap : corpus)
    for (const auto& t : ap.doc.tokens) vocab.count_word(t.lower);
  std::vector<PreparedPost> posts;
  posts.reserve(corpus.size());
  for (const auto& ap : corpus) {
    PreparedPost p;
    p.weight = ap.weight;
    for (const auto& span : candidate_spans(ap.doc, mode)) {
      Candidate c;
      c.span = span;
      c.gold = ap.gold->contains(span.head);
      c.fv = vectorize(candidate_keys(ap.doc, span, mode, vocab, cfg, res, domain_of(ap)), vocab);
      p.cands.push_back(std::move(c));
    }
    posts.push_back(std::move(p));
  }
  vocab.freeze();
  return posts;
}

}  // namespace detail

// Product stems annotated exactly once across the corpus.
inline std::set<std::string> singleton_types(const Corpus& corpus) {
  std::map<std::string, int> counts;
  for (const auto& ap : corpus)
    if (ap.gold)
      for (const auto& [i, tag] : ap.gold->products) ++counts[stem(ap.doc.tokens[static_cast<std::size_t>(i)].text)];
  std::set<std::string> out;
  for (const auto& [s, c] : counts)
    if (c == 1) out.insert(s);
  return out;
}

// Cost-weighted hinge loss per candidate, minimized by AdaGrad subgradient
// steps with L1, visiting candidates in a freshly shuffled order each pass.
inline LinearModel train_binary(const Corpus& corpus, Mode mode, const TrainConfig& config,
                                const FeatureConfig& features = {}, const FeatureResources& res = {}) {
  if (is_post_level(mode)) throw ConfigError("train_binary needs mode token or np");
  config.validate();
  detail::check_training_corpus(corpus, mode);

  LinearModel model;
  model.mode = mode;
  model.train = config;
  model.features = features;
  auto posts = detail::prepare(corpus, mode, features, res, model.vocab);
  const auto singletons = singleton_types(corpus);

  struct Example {
    const FeatureVector* fv;
    double y;
    double weight;
  };
  std::vector<Example> examples;
  for (std::size_t p = 0; p < posts.size(); ++p) {
    const auto& doc = corpus[p].doc;
    for (const auto& c : posts[p].cands) {
      double w = posts[p].weight * (c.gold ? config.cost_fn : config.cost_fp);
      if (c.gold && singletons.count(stem(doc.tokens[static_cast<std::size_t>(c.span.head)].text)))
        w *= config.singleton_weight;
      examples.push_back({&c.fv, c.gold ? 1.0 : -1.0, w});
    }
  }

  AdaGradL1 opt(model.vocab.size(), config.adagrad_eta, config.adagrad_delta, config.l1_strength);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (int it = 0; it < config.iterations; ++it) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      const Example& ex = examples[idx];
      opt.begin_step();
      opt.catch_up(*ex.fv);
      const double margin = ex.y * ex.fv->dot(opt.weights());
      if (margin >= 1.0) continue;
      for (const auto& [j, v] : ex.fv->entries) opt.apply(j, -ex.weight * ex.y * v);
    }
  }
  opt.finish();
  model.weights = opt.weights();
  return model;
}

// Latent structured SVM over the candidates of each post: the loss is
//   max_c (w.f(c) + cost(c)) - max_{g in gold} w.f(g)
// with cost 0 for gold candidates and 1 otherwise. Posts without gold
// products are skipped.
inline LinearModel train_post_latent(const Corpus& corpus, Mode mode, const TrainConfig& config,
                                     const FeatureConfig& features = {}, const FeatureResources& res = {}) {
  if (!is_post_level(mode)) throw ConfigError("train_post_latent needs mode post-token or post-np");
  config.validate();
  detail::check_training_corpus(corpus, mode);

  LinearModel model;
  model.mode = mode;
  model.train = config;
  model.features = features;
  auto posts = detail::prepare(corpus, mode, features, res, model.vocab);

  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < posts.size(); ++p)
    if (std::any_of(posts[p].cands.begin(), posts[p].cands.end(), [](const auto& c) { return c.gold; }))
      order.push_back(p);
  if (order.empty()) throw InputError("no training post has a gold product candidate");

  AdaGradL1 opt(model.vocab.size(), config.adagrad_eta, config.adagrad_delta, config.l1_strength);
  std::mt19937_64 rng(config.seed);
  std::map<int, double> grad;
  for (int it = 0; it < config.iterations; ++it) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t p : order) {
      const auto& cands = posts[p].cands;
      opt.begin_step();
      for (const auto& c : cands) opt.catch_up(c.fv);
      const auto& w = opt.weights();
      std::size_t best_any = 0, best_gold = 0;
      double best_any_score = -std::numeric_limits<double>::infinity();
      double best_gold_score = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < cands.size(); ++k) {
        const double s = cands[k].fv.dot(w);
        const double augmented = s + (cands[k].gold ? 0.0 : 1.0);
        if (augmented > best_any_score) {
          best_any_score = augmented;
          best_any = k;
        }
        if (cands[k].gold && s > best_gold_score) {
          best_gold_score = s;
          best_gold = k;
        }
      }
      if (best_any_score - best_gold_score <= 0.0) continue;
      grad.clear();
      for (const auto& [j, v] : cands[best_any].fv.entries) grad[j] += posts[p].weight * v;
      for (const auto& [j, v] : cands[best_gold].fv.entries) grad[j] -= posts[p].weight * v;
      for (const auto& [j, g] : grad)
        if (g != 0.0) opt.apply(j, g);
    }
  }
  opt.finish();
  model.weights = opt.weights();
  return model;
}

inline LinearModel train(const Corpus& corpus, Mode mode, const TrainConfig& config,
                         const FeatureConfig& features = {}, const FeatureResources& res = {}) {
  return is_post_level(mode) ? train_post_latent(corpus, mode, config, features, res)
                             : train_binary(corpus, mode, config, features, res);
}

namespace detail {

inline std::vector<std::pair<Span, double>> scored_candidates(const LinearModel& model, const Document& doc,
                                                              const FeatureResources& res) {
  std::vector<std::pair<Span, double>> out;
  for (const auto& span : candidate_spans(doc, model.mode)) {
    auto keys = candidate_keys(doc, span, model.mode, model.vocab, model.features, res, doc.post.forum_id);
    out.emplace_back(span, model.score(vectorize(keys, std::as_const(model.vocab))));
  }
  return out;
}

}  // namespace detail

// Every eligible candidate with a positive score, in document order.
inline std::vector<Span> predict_binary(const LinearModel& model, const Document& doc,
                                        const FeatureResources& res = {}) {
  if (is_post_level(model.mode))
    throw ConfigError(std::string("predict_binary: model mode is ") + to_string(model.mode));
  std::vector<Span> out;
  for (const auto& [span, s] : detail::scored_candidates(model, doc, res))
    if (s > 0.0) out.push_back(span);
  return out;
}

// Highest-scoring eligible candidate; ties go to the earliest.
inline std::optional<Span> predict_post(const LinearModel& model, const Document& doc,
                                        const FeatureResources& res = {}) {
  if (!is_post_level(model.mode))
    throw ConfigError(std::string("predict_post: model mode is ") + to_string(model.mode));
  std::optional<Span> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [span, s] : detail::scored_candidates(model, doc, res))
    if (s > best_score) {
      best_score = s;
      best = span;
    }
  return best;
}

inline std::vector<Span> predict(const LinearModel& model, const Document& doc, const FeatureResources& res = {}) {
  if (is_post_level(model.mode)) {
    auto one = predict_post(model, doc, res);
    return one ? std::vector<Span>{*one} : std::vector<Span>{};
  }
  return predict_binary(model, doc, res);
}

// ---------------------------------------------------------------------------
// Baselines

inline bool is_stopword(const std::string& lower) {
  static const std::set<std::string> kStop = {
      "a",     "about", "after", "all",   "also",  "am",    "an",    "and",   "any",   "are",   "as",    "at",
      "be",    "been",  "but",   "by",    "can",   "could", "do",    "does",  "for",   "from",  "get",   "got",
      "had",   "has",   "have",  "he",    "her",   "him",   "his",   "how",   "i",     "if",    "in",    "into",
      "is",    "it",    "its",   "just",  "me",    "more",  "my",    "no",    "not",   "now",   "of",    "on",
      "one",   "only",  "or",    "other", "our",   "out",   "pm",    "so",    "some",  "than",  "that",  "the",
      "their", "them",  "then",  "there", "these", "they",  "this",  "to",    "u",     "up",    "us",    "very",
      "was",   "we",    "what",  "when",  "which", "who",   "will",  "with",  "would", "you",   "your"};
  return kStop.count(lower) != 0;
}

// Nouns and verbs when POS tags exist, otherwise non-stopword tokens that
// contain a letter.
inline bool is_content_candidate(const Document& doc, int i) {
  const Token& t = doc.tokens[static_cast<std::size_t>(i)];
  if (doc.has_syntax) return is_nominal(t) || is_verbal(t);
  return std::any_of(t.lower.begin(), t.lower.end(), text::is_ascii_alpha) && !is_stopword(t.lower);
}

namespace detail {

template <typename Allowed>
std::vector<int> most_frequent_type(const Document& doc, Allowed&& allowed) {
  std::map<std::string, std::pair<int, int>> stats;  // lower -> (count, first index)
  for (int i = 0; i < doc.size(); ++i) {
    if (!doc.in_scope(i) || !is_content_candidate(doc, i)) continue;
    const std::string& w = doc.tokens[static_cast<std::size_t>(i)].lower;
    if (!allowed(w)) continue;
    auto [it, inserted] = stats.try_emplace(w, 0, i);
    ++it->second.first;
  }
  const std::string* best = nullptr;
  std::pair<int, int> best_stat{0, 0};
  for (const auto& [w, st] : stats)
    if (!best || st.first > best_stat.first || (st.first == best_stat.first && st.second < best_stat.second)) {
      best = &w;
      best_stat = st;
    }
  std::vector<int> out;
  if (!best) return out;
  for (int i = 0; i < doc.size(); ++i)
    if (doc.in_scope(i) && is_content_candidate(doc, i) && doc.tokens[static_cast<std::size_t>(i)].lower == *best)
      out.push_back(i);
  return out;
}

}  // namespace detail

inline std::vector<int> predict_freq(const Document& doc) {
  return detail::most_frequent_type(doc, [](const std::string&) { return true; });
}

// The dictionary holds stems of the training corpus's gold products.
inline std::vector<int> predict_dict(const Document& doc, const Gazetteer& dictionary) {
  return detail::most_frequent_type(doc, [&](const std::string& w) { return dictionary.matches(w); });
}

inline Gazetteer product_dictionary(const Corpus& train) { return build_gazetteer(train, 1); }

inline std::optional<Span> predict_first_np(const Document& doc) {
  if (!doc.has_syntax) throw ConfigError("post " + doc.post.post_id + " has no syntax; the First baseline needs it");
  for (int i = 0; i < doc.size(); ++i) {
    if (!doc.in_scope(i) || !is_nominal(doc.tokens[static_cast<std::size_t>(i)])) continue;
    // climb noun-noun attachments so a modifier yields its phrase
    int top = i;
    for (auto p = doc.parent(top); p && is_nominal(doc.tokens[static_cast<std::size_t>(*p)]); p = doc.parent(top))
      top = *p;
    Span s = project(doc, top);
    return s.start <= i && i < s.end ? s : project(doc, i);
  }
  return std::nullopt;
}

inline std::vector<Span> to_spans(const Document& doc, const std::vector<int>& tokens, bool phrases) {
  std::vector<Span> out;
  for (int i : tokens) out.push_back(phrases ? project(doc, i) : single_token_span(doc, i));
  return out;
}

}  // namespace marketsieve

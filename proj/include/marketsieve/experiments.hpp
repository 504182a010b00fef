#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "marketsieve/adaptation.hpp"
#include "marketsieve/brown.hpp"
#include "marketsieve/evaluation.hpp"
#include "marketsieve/learning.hpp"

// Multi-step workflows shared by the command-line driver and the tests.
namespace marketsieve {

inline std::vector<std::vector<Span>> predict_corpus(const LinearModel& model, const Corpus& corpus,
                                                     const FeatureResources& res = {}) {
  std::vector<std::vector<Span>> out;
  out.reserve(corpus.size());
  for (const auto& ap : corpus) out.push_back(predict(model, ap.doc, res));
  return out;
}

enum class Baseline { freq, dict, first };

inline Baseline baseline_from_string(const std::string& s) {
  if (s == "freq") return Baseline::freq;
  if (s == "dict") return Baseline::dict;
  if (s == "first") return Baseline::first;
  throw ConfigError("unknown baseline '" + s + "' (expected freq, dict or first)");
}

inline std::vector<std::vector<Span>> baseline_corpus(Baseline b, const Corpus& corpus, bool phrases,
                                                      const Gazetteer* dictionary = nullptr) {
  if (b == Baseline::dict && !dictionary) throw ConfigError("the dict baseline needs a training corpus");
  if (b == Baseline::first && !phrases) throw ConfigError("the first-NP baseline is only defined at the NP level");
  std::vector<std::vector<Span>> out;
  for (const auto& ap : corpus) {
    const auto& doc = ap.doc;
    if (phrases && !doc.has_syntax)
      throw InputError("post " + doc.post.post_id + " has no syntax; use token-level evaluation");
    switch (b) {
      case Baseline::freq: out.push_back(to_spans(doc, predict_freq(doc), phrases)); break;
      case Baseline::dict: out.push_back(to_spans(doc, predict_dict(doc, *dictionary), phrases)); break;
      case Baseline::first: {
        auto s = predict_first_np(doc);
        out.push_back(s ? std::vector<Span>{*s} : std::vector<Span>{});
        break;
      }
    }
  }
  return out;
}

inline constexpr std::array<double, 5> kCostGrid{0.25, 0.5, 1.0, 2.0, 4.0};

struct TuneResult {
  TrainConfig config;
  std::vector<std::pair<double, double>> grid;  // cost_fn / cost_fp ratio, dev F1
};

// Picks the false-negative/false-positive cost ratio with the best dev F1;
// ties keep the earlier grid point.
inline TuneResult tune_costs(const Corpus& train, const Corpus& dev, Mode mode, const TrainConfig& base,
                             const FeatureConfig& features = {}, const FeatureResources& train_res = {},
                             const FeatureResources& dev_res = {}) {
  if (is_post_level(mode)) throw ConfigError("cost tuning applies to the binary modes only");
  TuneResult result;
  double best = -1.0;
  for (double ratio : kCostGrid) {
    TrainConfig cfg = base;
    cfg.cost_fp = 1.0;
    cfg.cost_fn = ratio;
    auto model = train_binary(train, mode, cfg, features, train_res);
    double f1 = evaluate(dev, predict_corpus(model, dev, dev_res)).token_prf.f1;
    result.grid.emplace_back(ratio, f1);
    if (f1 > best) {
      best = f1;
      result.config = cfg;
    }
  }
  return result;
}

// n posts chosen by seed, kept in corpus order. For a fixed seed, smaller
// samples are subsets of larger ones.
inline Corpus sample_posts(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.size())
    throw ConfigError("requested " + std::to_string(n) + " posts but only " + std::to_string(corpus.size()) +
                      " are available");
  std::vector<std::size_t> idx(corpus.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Corpus out;
  for (auto i : idx) out.push_back(corpus[i]);
  return out;
}

struct NamedCorpus {
  std::string name;
  Corpus corpus;
};

enum class Variant { dict, binary, binary_brown, binary_gaz, post, post_brown, post_gaz };

inline constexpr std::array<Variant, 7> kAllVariants{Variant::dict,       Variant::binary,   Variant::binary_brown,
                                                     Variant::binary_gaz, Variant::post,     Variant::post_brown,
                                                     Variant::post_gaz};

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::dict: return "Dict";
    case Variant::binary: return "Binary";
    case Variant::binary_brown: return "Binary+Brown";
    case Variant::binary_gaz: return "Binary+Gaz";
    case Variant::post: return "Post";
    case Variant::post_brown: return "Post+Brown";
    case Variant::post_gaz: return "Post+Gaz";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  for (auto v : kAllVariants)
    if (text::to_lower(s) == text::to_lower(to_string(v))) return v;
  throw ConfigError("unknown system variant '" + s + "'");
}

inline bool uses_brown(Variant v) { return v == Variant::binary_brown || v == Variant::post_brown; }
inline bool uses_gazetteer(Variant v) { return v == Variant::binary_gaz || v == Variant::post_gaz; }
inline bool is_post_variant(Variant v) {
  return v == Variant::post || v == Variant::post_brown || v == Variant::post_gaz;
}

struct XdomainOptions {
  bool phrases = true;
  std::vector<Variant> variants;
  TrainConfig train;
  FeatureConfig features;
  const ClusterHierarchy* clusters = nullptr;
  int gazetteer_min_count = 4;
};

struct XdomainCell {
  Variant variant = Variant::binary;
  std::string train_name;
  std::string eval_name;
  std::optional<EvalReport> report;  // empty: the variant has no resource for this forum
};

// Trains every variant on every training corpus and scores it on every
// evaluation corpus. The gazetteer used when scoring forum F is built from
// the training corpus named F.
inline std::vector<XdomainCell> run_xdomain(const std::vector<NamedCorpus>& train_sets,
                                            const std::vector<NamedCorpus>& eval_sets, const XdomainOptions& opts) {
  if (train_sets.empty() || eval_sets.empty()) throw ConfigError("xdomain needs at least one train and one eval corpus");
  auto find_train = [&](const std::string& name) -> const Corpus* {
    for (const auto& t : train_sets)
      if (t.name == name) return &t.corpus;
    return nullptr;
  };
  std::vector<XdomainCell> cells;
  for (const auto& tr : train_sets) {
    const Gazetteer train_gaz = build_gazetteer(tr.corpus, opts.gazetteer_min_count, tr.name);
    const Gazetteer dictionary = product_dictionary(tr.corpus);
    for (Variant v : opts.variants) {
      if (uses_brown(v) && !opts.clusters) throw ConfigError(std::string(to_string(v)) + " needs --clusters");
      std::optional<LinearModel> model;
      if (v != Variant::dict) {
        FeatureConfig fc = opts.features;
        fc.use_brown = uses_brown(v);
        fc.use_gazetteer = uses_gazetteer(v);
        Mode mode = is_post_variant(v) ? (opts.phrases ? Mode::post_np : Mode::post_token)
                                       : (opts.phrases ? Mode::np : Mode::token);
        model = train(tr.corpus, mode, opts.train, fc, {opts.clusters, fc.use_gazetteer ? &train_gaz : nullptr});
      }
      for (const auto& ev : eval_sets) {
        XdomainCell cell{v, tr.name, ev.name, std::nullopt};
        if (v == Variant::dict) {
          cell.report = evaluate(ev.corpus, baseline_corpus(Baseline::dict, ev.corpus, opts.phrases, &dictionary));
        } else {
          std::optional<Gazetteer> eval_gaz;
          if (uses_gazetteer(v)) {
            const Corpus* own = find_train(ev.name);
            if (own) eval_gaz = build_gazetteer(*own, opts.gazetteer_min_count, ev.name);
          }
          if (!uses_gazetteer(v) || eval_gaz) {
            FeatureResources res{opts.clusters, eval_gaz ? &*eval_gaz : nullptr};
            cell.report = evaluate(ev.corpus, predict_corpus(*model, ev.corpus, res));
          }
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

struct CurveOptions {
  std::vector<std::size_t> sizes{0, 20, 40, 80};
  bool phrases = true;
  TrainConfig train;
  FeatureConfig features;
  const ClusterHierarchy* clusters = nullptr;
};

struct CurvePoint {
  std::size_t size = 0;
  bool augmented = false;
  EvalReport report;
};

// Binary models trained on the source plus a growing, upweighted sample of
// target posts, with and without domain-augmented features.
inline std::vector<CurvePoint> run_curve(const Corpus& source, const Corpus& target_train,
                                         const Corpus& target_eval, const CurveOptions& opts) {
  if (source.empty()) throw InputError("learning curve needs a non-empty source corpus");
  for (auto n : opts.sizes)
    if (n > target_train.size())
      throw ConfigError("target size " + std::to_string(n) + " exceeds the " + std::to_string(target_train.size()) +
                        " available target posts");
  const Mode mode = opts.phrases ? Mode::np : Mode::token;
  std::vector<CurvePoint> out;
  for (auto n : opts.sizes) {
    Corpus sample = sample_posts(target_train, n, opts.train.seed);
    for (bool augment : {false, true}) {
      auto mixed = mix_corpora(source, sample, opts.train.target_domain_weight, augment);
      FeatureConfig fc = opts.features;
      fc.domain_augment = augment;
      fc.use_brown = opts.clusters != nullptr;
      auto model = train_binary(mixed.posts, mode, opts.train, fc, {opts.clusters, nullptr});
      out.push_back({n, augment, evaluate(target_eval, predict_corpus(model, target_eval, {opts.clusters, nullptr}))});
    }
  }
  return out;
}

}  // namespace marketsieve

#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"

namespace marketsieve {

// Token is a product iff strictly more than half the annotators marked it.
// The trade tag is the plurality among those who marked it (ties are
// unspecified); flags follow the same strict-majority rule.
inline AnnotationLayer merge_majority(const Document& doc, std::span<const AnnotationLayer> layers,
                                      std::string annotator_id = "majority") {
  if (layers.size() < 2) throw std::invalid_argument("merge_majority needs at least two layers");
  for (const auto& l : layers)
    for (const auto& [i, tag] : l.products)
      if (i < 0 || i >= doc.size() || !doc.in_scope(i))
        throw InputError("layer '" + l.annotator_id + "' does not belong to post " + doc.post.post_id +
                         ": token " + std::to_string(i) + " is not an annotatable token");

  const std::size_t n = layers.size();
  std::map<int, std::array<std::size_t, 3>> votes;  // indexed by TradeTag
  std::map<char, std::size_t> flag_votes;
  for (const auto& l : layers) {
    for (const auto& [i, tag] : l.products) ++votes[i][static_cast<std::size_t>(tag)];
    for (char f : l.flags) ++flag_votes[f];
  }

  AnnotationLayer merged;
  merged.annotator_id = std::move(annotator_id);
  for (const auto& [i, v] : votes) {
    std::size_t total = v[0] + v[1] + v[2];
    if (2 * total <= n) continue;
    std::size_t best = std::max({v[0], v[1], v[2]});
    int winners = (v[0] == best) + (v[1] == best) + (v[2] == best);
    TradeTag tag = TradeTag::unspecified;
    if (winners == 1) tag = v[1] == best ? TradeTag::buy : (v[2] == best ? TradeTag::sell : TradeTag::unspecified);
    merged.products[i] = tag;
  }
  for (const auto& [f, count] : flag_votes)
    if (2 * count > n) merged.add_flag(f);
  return merged;
}

// Per-item counts of (product, not-product) judgements.
using CategoryCounts = std::array<int, 2>;

// Fleiss' kappa over items with possibly varying rater counts (items with
// fewer than two raters are ignored). nullopt when expected agreement is 1.
inline std::optional<double> fleiss_kappa(std::span<const CategoryCounts> items) {
  double sum_agreement = 0.0;
  double total_ratings = 0.0;
  std::array<double, 2> category_totals{0.0, 0.0};
  std::size_t n_items = 0;
  for (const auto& c : items) {
    const double n = c[0] + c[1];
    if (n < 2) continue;
    sum_agreement += (static_cast<double>(c[0]) * c[0] + static_cast<double>(c[1]) * c[1] - n) / (n * (n - 1));
    category_totals[0] += c[0];
    category_totals[1] += c[1];
    total_ratings += n;
    ++n_items;
  }
  if (n_items == 0) throw InputError("fleiss_kappa: no items with at least two ratings");

  // Constant panel: kappa = (A T - S (n-1)) / (T^2 (n-1) - S (n-1)) in integers,
  // so the result is the correctly rounded quotient.
  std::optional<long long> panel;
  bool constant = true;
  for (const auto& c : items) {
    const long long n = c[0] + c[1];
    if (n < 2) continue;
    if (panel && *panel != n) constant = false;
    panel = n;
  }
  if (constant) {
    const long long n = *panel;
    long long a = 0;
    for (const auto& c : items)
      if (c[0] + c[1] >= 2) a += static_cast<long long>(c[0]) * c[0] + static_cast<long long>(c[1]) * c[1] - n;
    const auto t = static_cast<long long>(total_ratings);
    const auto c0 = static_cast<long long>(category_totals[0]), c1 = static_cast<long long>(category_totals[1]);
    const long long s = c0 * c0 + c1 * c1;
    const long long den = t * t * (n - 1) - s * (n - 1);
    if (den <= 0) return std::nullopt;
    return static_cast<double>(a * t - s * (n - 1)) / static_cast<double>(den);
  }

  const double p_bar = sum_agreement / static_cast<double>(n_items);
  const double p0 = category_totals[0] / total_ratings;
  const double p1 = category_totals[1] / total_ratings;
  const double p_e = p0 * p0 + p1 * p1;
  if (p_e >= 1.0) return std::nullopt;
  return (p_bar - p_e) / (1.0 - p_e);
}

struct KappaOptions {
  // Items are scope-eligible tokens unless this is set.
  bool all_tokens = false;
};

inline std::vector<CategoryCounts> kappa_items(const Document& doc, std::span<const AnnotationLayer> layers,
                                               const KappaOptions& opts = {}) {
  std::vector<CategoryCounts> items;
  for (int i = 0; i < doc.size(); ++i) {
    if (!opts.all_tokens && !doc.in_scope(i)) continue;
    CategoryCounts c{0, 0};
    for (const auto& l : layers) ++c[l.contains(i) ? 0 : 1];
    items.push_back(c);
  }
  return items;
}

inline std::optional<double> fleiss_kappa(const Document& doc, std::span<const AnnotationLayer> layers,
                                          const KappaOptions& opts = {}) {
  if (layers.size() < 2) throw std::invalid_argument("fleiss_kappa needs at least two layers");
  auto items = kappa_items(doc, layers, opts);
  if (items.empty()) throw InputError("fleiss_kappa: post " + doc.post.post_id + " has no eligible tokens");
  return fleiss_kappa(items);
}

struct AgreementReport {
  std::size_t n_posts = 0;
  std::size_t n_tokens = 0;
  std::size_t n_annotators = 0;  // largest panel among included posts
  std::optional<double> kappa;
  std::vector<std::pair<std::string, int>> disagreements;  // per post: items without unanimity
};

// Pools items across every post whose panel size satisfies the filter.
template <typename PanelFilter>
AgreementReport agreement_report(const Corpus& corpus, PanelFilter&& include, const KappaOptions& opts = {}) {
  AgreementReport report;
  std::vector<CategoryCounts> pooled;
  for (const auto& ap : corpus) {
    if (ap.layers.size() < 2 || !include(ap.layers.size())) continue;
    auto items = kappa_items(ap.doc, ap.layers, opts);
    int disagree = 0;
    for (const auto& c : items)
      if (c[0] != 0 && c[1] != 0) ++disagree;
    report.disagreements.emplace_back(ap.doc.post.post_id, disagree);
    report.n_annotators = std::max(report.n_annotators, ap.layers.size());
    ++report.n_posts;
    pooled.insert(pooled.end(), items.begin(), items.end());
  }
  report.n_tokens = pooled.size();
  if (!pooled.empty()) report.kappa = fleiss_kappa(pooled);
  return report;
}

}  // namespace marketsieve

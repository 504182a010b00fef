#pragma once

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"

namespace marketsieve {

inline constexpr int kMaxNounPhrase = 7;

// Token indices are document-level; [start, end) is contiguous within one
// sentence and contains head.
struct Span {
  int sent_index = 0;
  int start = 0;
  int end = 0;
  int head = 0;

  int size() const { return end - start; }
  bool contains(int i) const { return i >= start && i < end; }
  bool operator==(const Span&) const = default;
};

inline Span single_token_span(const Document& doc, int i) {
  return {doc.tokens[static_cast<std::size_t>(i)].sent_index, i, i + 1, i};
}

// Head-anchored: extents may differ.
inline bool spans_match(const Span& a, const Span& b) { return a.sent_index == b.sent_index && a.head == b.head; }

inline bool is_nominal(const Token& t) { return t.pos_tag && !t.pos_tag->empty() && (*t.pos_tag)[0] == 'N'; }
inline bool is_verbal(const Token& t) { return t.pos_tag && !t.pos_tag->empty() && (*t.pos_tag)[0] == 'V'; }

namespace detail {

// Sentence-relative children lists.
inline std::vector<std::vector<int>> children(const Document& doc, const Sentence& sent) {
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(sent.size()));
  for (int p = 0; p < sent.size(); ++p) {
    const auto& h = doc.tokens[static_cast<std::size_t>(sent.begin + p)].head;
    if (h && *h >= 0) kids[static_cast<std::size_t>(*h)].push_back(p);
  }
  return kids;
}

inline void collect_subtree(const std::vector<std::vector<int>>& kids, int root, std::vector<int>& out) {
  std::vector<int> stack{root};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (int c : kids[static_cast<std::size_t>(n)]) stack.push_back(c);
  }
}

}  // namespace detail

// Projects a token to a phrase. Nominal tokens take the extent of their
// dependency subtree; while that is longer than kMaxNounPhrase or not
// contiguous, the dependent subtree whose extent reaches farthest from the
// head is dropped (rightmost first on ties). Every other token projects to
// itself.
inline Span project(const Document& doc, int token_index) {
  if (!doc.has_syntax)
    throw ConfigError("post " + doc.post.post_id +
                      " has no syntax; NP projection is unavailable, use token-level evaluation");
  if (token_index < 0 || token_index >= doc.size()) throw std::out_of_range("project: token index");
  const Token& tok = doc.tokens[static_cast<std::size_t>(token_index)];
  if (!is_nominal(tok)) return single_token_span(doc, token_index);

  const Sentence& sent = doc.sentence_of(token_index);
  const auto kids = detail::children(doc, sent);
  const int head = tok.pos_in_sent;

  struct Dependent {
    int lo;
    int hi;
    std::vector<int> members;
  };
  std::vector<Dependent> deps;
  for (int c : kids[static_cast<std::size_t>(head)]) {
    Dependent d;
    detail::collect_subtree(kids, c, d.members);
    auto [lo, hi] = std::minmax_element(d.members.begin(), d.members.end());
    d.lo = *lo;
    d.hi = *hi;
    deps.push_back(std::move(d));
  }

  while (true) {
    int lo = head;
    int hi = head;
    std::size_t count = 1;
    for (const auto& d : deps) {
      lo = std::min(lo, d.lo);
      hi = std::max(hi, d.hi);
      count += d.members.size();
    }
    const int length = hi - lo + 1;
    if (length <= kMaxNounPhrase && static_cast<std::size_t>(length) == count)
      return {tok.sent_index, sent.begin + lo, sent.begin + hi + 1, token_index};
    auto reach = [head](const Dependent& d) { return std::max(std::abs(d.lo - head), std::abs(d.hi - head)); };
    auto farthest = deps.begin();
    for (auto it = deps.begin(); it != deps.end(); ++it)
      if (reach(*it) > reach(*farthest) || (reach(*it) == reach(*farthest) && it->hi > farthest->hi)) farthest = it;
    deps.erase(farthest);
  }
}

}  // namespace marketsieve

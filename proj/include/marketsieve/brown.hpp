#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "marketsieve/error.hpp"
#include "marketsieve/text.hpp"

namespace marketsieve {

// One step of the clustering run. Node ids: leaves are word indices
// [0, V); internal nodes are numbered V, V+1, ... in merge order.
struct ClusterEvent {
  enum class Kind { insert, merge };
  Kind kind = Kind::insert;
  int node = -1;   // inserted leaf, or the new internal node
  int left = -1;   // merge children, "0" side first
  int right = -1;
  double objective = 0.0;  // AMI of the active clustering after the step
};

struct ClusterHierarchy {
  std::vector<std::string> words;  // descending frequency, ties lexicographic
  std::vector<long> counts;
  std::vector<std::string> bits;   // per word: root-to-leaf path
  std::vector<std::array<int, 2>> children;  // internal node id - V -> children
  std::vector<ClusterEvent> log;

  std::size_t size() const { return words.size(); }

  const std::string* id(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? nullptr : &bits[static_cast<std::size_t>(it->second)];
  }

  int word_index(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
  }

  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < words.size(); ++i) index_.emplace(words[i], static_cast<int>(i));
  }

  int root() const {
    return children.empty() ? 0 : static_cast<int>(words.size() + children.size()) - 1;
  }

  // Leaves (word indices) below a node.
  std::vector<int> leaves(int node) const {
    std::vector<int> out;
    std::vector<int> stack{node};
    const int v = static_cast<int>(words.size());
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      if (n < v) {
        out.push_back(n);
      } else {
        const auto& c = children[static_cast<std::size_t>(n - v)];
        stack.push_back(c[1]);
        stack.push_back(c[0]);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Partition into k clusters by undoing the last k-1 merges.
  std::vector<std::vector<int>> cut(int k) const {
    if (children.empty()) throw std::logic_error("cluster tree not available (loaded from file?)");
    const int v = static_cast<int>(words.size());
    if (k < 1 || k > v) throw std::invalid_argument("cut size out of range");
    std::vector<int> nodes{root()};
    while (static_cast<int>(nodes.size()) < k) {
      auto it = std::max_element(nodes.begin(), nodes.end());
      int n = *it;
      nodes.erase(it);
      const auto& c = children[static_cast<std::size_t>(n - v)];
      nodes.push_back(c[0]);
      nodes.push_back(c[1]);
    }
    std::vector<std::vector<int>> parts;
    for (int n : nodes) parts.push_back(leaves(n));
    std::sort(parts.begin(), parts.end());
    return parts;
  }

 private:
  std::unordered_map<std::string, int> index_;
};

namespace detail {

inline double mi_term(double nxy, double nlx, double nry, double total) {
  if (nxy <= 0.0) return 0.0;
  return nxy / total * std::log(nxy * total / (nlx * nry));
}

// Active clusters with their adjacent-pair counts. Only bigrams whose two
// words are both active contribute.
class ActiveClusters {
 public:
  std::vector<int> node;  // slot -> tree node
  std::vector<std::vector<double>> n;
  std::vector<double> nl, nr;
  double total = 0.0;

  std::size_t size() const { return node.size(); }

  void refresh_marginals() {
    const std::size_t c = size();
    nl.assign(c, 0.0);
    nr.assign(c, 0.0);
    total = 0.0;
    for (std::size_t a = 0; a < c; ++a)
      for (std::size_t b = 0; b < c; ++b) {
        nl[a] += n[a][b];
        nr[b] += n[a][b];
        total += n[a][b];
      }
  }

  double q(std::size_t a, std::size_t b) const { return mi_term(n[a][b], nl[a], nr[b], total); }

  double objective() const {
    double sum = 0.0;
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = 0; b < size(); ++b) sum += q(a, b);
    return sum;
  }

  // Change in objective if slots a and b were merged.
  double merge_delta(std::size_t a, std::size_t b) const {
    double old_terms = -(q(a, a) + q(a, b) + q(b, a) + q(b, b));
    double new_terms = 0.0;
    const double nlm = nl[a] + nl[b];
    const double nrm = nr[a] + nr[b];
    for (std::size_t t = 0; t < size(); ++t) {
      old_terms += q(a, t) + q(b, t) + q(t, a) + q(t, b);
      if (t == a || t == b) continue;
      new_terms += mi_term(n[a][t] + n[b][t], nlm, nr[t], total);
      new_terms += mi_term(n[t][a] + n[t][b], nl[t], nrm, total);
    }
    new_terms += mi_term(n[a][a] + n[a][b] + n[b][a] + n[b][b], nlm, nrm, total);
    return new_terms - old_terms;
  }

  void merge_into(std::size_t a, std::size_t b) {
    for (std::size_t t = 0; t < size(); ++t) n[a][t] += n[b][t];
    for (std::size_t t = 0; t < size(); ++t) n[t][a] += n[t][b];
    const std::size_t last = size() - 1;
    if (b != last) {
      node[b] = node[last];
      n[b] = n[last];
      for (auto& row : n) row[b] = row[last];
    }
    node.pop_back();
    n.pop_back();
    for (auto& row : n) row.pop_back();
    refresh_marginals();
  }
};

}  // namespace detail

struct BrownOptions {
  int num_clusters = 50;
  long min_word_count = 10;
};

// Agglomerative Brown clustering with an active window of num_clusters
// clusters. Each sequence contributes bigrams between adjacent tokens.
inline ClusterHierarchy brown_cluster(const std::vector<std::vector<std::string>>& sequences,
                                      const BrownOptions& opts = {}) {
  if (opts.num_clusters < 2) throw std::invalid_argument("num_clusters must be at least 2");
  std::map<std::string, long> freq;
  std::size_t n_tokens = 0;
  for (const auto& seq : sequences)
    for (const auto& w : seq) {
      ++freq[w];
      ++n_tokens;
    }
  if (n_tokens == 0) throw InputError("brown_cluster: empty token stream");

  ClusterHierarchy h;
  std::vector<std::pair<std::string, long>> vocab;
  for (const auto& [w, c] : freq)
    if (c >= opts.min_word_count) vocab.emplace_back(w, c);
  std::stable_sort(vocab.begin(), vocab.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  if (static_cast<int>(vocab.size()) < opts.num_clusters)
    throw ConfigError("num_clusters (" + std::to_string(opts.num_clusters) + ") exceeds the vocabulary size after the count cutoff (" +
                      std::to_string(vocab.size()) + ")");
  for (auto& [w, c] : vocab) {
    h.words.push_back(w);
    h.counts.push_back(c);
  }
  h.reindex();
  const int v = static_cast<int>(h.words.size());

  // Word-level bigram adjacency.
  std::vector<std::map<int, double>> right(static_cast<std::size_t>(v));
  for (const auto& seq : sequences)
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      int a = h.word_index(seq[i]);
      int b = h.word_index(seq[i + 1]);
      if (a >= 0 && b >= 0) right[static_cast<std::size_t>(a)][b] += 1.0;
    }
  std::vector<std::map<int, double>> left(static_cast<std::size_t>(v));
  for (int a = 0; a < v; ++a)
    for (const auto& [b, c] : right[static_cast<std::size_t>(a)]) left[static_cast<std::size_t>(b)][a] += c;

  std::vector<double> node_count;
  std::vector<std::string> node_min;
  for (int i = 0; i < v; ++i) {
    node_count.push_back(static_cast<double>(h.counts[static_cast<std::size_t>(i)]));
    node_min.push_back(h.words[static_cast<std::size_t>(i)]);
  }

  detail::ActiveClusters active;
  std::vector<int> word_slot(static_cast<std::size_t>(v), -1);
  std::vector<std::vector<int>> slot_words;

  auto insert = [&](int w) {
    const std::size_t s = active.size();
    active.node.push_back(w);
    for (auto& row : active.n) row.push_back(0.0);
    active.n.emplace_back(s + 1, 0.0);
    for (const auto& [b, c] : right[static_cast<std::size_t>(w)]) {
      if (b == w) active.n[s][s] += c;
      else if (word_slot[static_cast<std::size_t>(b)] >= 0) active.n[s][static_cast<std::size_t>(word_slot[static_cast<std::size_t>(b)])] += c;
    }
    for (const auto& [a, c] : left[static_cast<std::size_t>(w)]) {
      if (a != w && word_slot[static_cast<std::size_t>(a)] >= 0) active.n[static_cast<std::size_t>(word_slot[static_cast<std::size_t>(a)])][s] += c;
    }
    word_slot[static_cast<std::size_t>(w)] = static_cast<int>(s);
    slot_words.push_back({w});
    active.refresh_marginals();
    h.log.push_back({ClusterEvent::Kind::insert, w, -1, -1, active.objective()});
  };

  auto merge_best = [&] {
    std::size_t best_a = 0, best_b = 1;
    double best = -std::numeric_limits<double>::infinity();
    // Visit pairs in tree-node order so ties resolve deterministically.
    std::vector<std::size_t> order(active.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return active.node[x] < active.node[y]; });
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t j = i + 1; j < order.size(); ++j) {
        double d = active.merge_delta(order[i], order[j]);
        if (d > best) {
          best = d;
          best_a = order[i];
          best_b = order[j];
        }
      }
    if (best_b < best_a) std::swap(best_a, best_b);
    const int na = active.node[best_a];
    const int nb = active.node[best_b];
    const int merged = v + static_cast<int>(h.children.size());
    auto first = [&](int x, int y) {
      if (node_count[static_cast<std::size_t>(x)] != node_count[static_cast<std::size_t>(y)])
        return node_count[static_cast<std::size_t>(x)] < node_count[static_cast<std::size_t>(y)];
      return node_min[static_cast<std::size_t>(x)] < node_min[static_cast<std::size_t>(y)];
    };
    std::array<int, 2> kids = first(na, nb) ? std::array<int, 2>{na, nb} : std::array<int, 2>{nb, na};
    h.children.push_back(kids);
    node_count.push_back(node_count[static_cast<std::size_t>(na)] + node_count[static_cast<std::size_t>(nb)]);
    node_min.push_back(std::min(node_min[static_cast<std::size_t>(na)], node_min[static_cast<std::size_t>(nb)]));

    for (int w : slot_words[best_b]) {
      word_slot[static_cast<std::size_t>(w)] = static_cast<int>(best_a);
      slot_words[best_a].push_back(w);
    }
    const std::size_t last = active.size() - 1;
    active.merge_into(best_a, best_b);
    if (best_b != last) {
      slot_words[best_b] = std::move(slot_words[last]);
      for (int w : slot_words[best_b]) word_slot[static_cast<std::size_t>(w)] = static_cast<int>(best_b);
    }
    slot_words.pop_back();
    active.node[best_a] = merged;
    h.log.push_back({ClusterEvent::Kind::merge, merged, kids[0], kids[1], active.objective()});
  };

  for (int w = 0; w < opts.num_clusters; ++w) insert(w);
  for (int w = opts.num_clusters; w < v; ++w) {
    insert(w);
    merge_best();
  }
  while (active.size() > 1) merge_best();

  // Bit strings, root to leaf.
  h.bits.assign(static_cast<std::size_t>(v), std::string());
  std::vector<std::pair<int, std::string>> stack{{h.root(), std::string()}};
  while (!stack.empty()) {
    auto [node, path] = std::move(stack.back());
    stack.pop_back();
    if (node < v) {
      h.bits[static_cast<std::size_t>(node)] = path;
    } else {
      const auto& c = h.children[static_cast<std::size_t>(node - v)];
      stack.emplace_back(c[1], path + '1');
      stack.emplace_back(c[0], path + '0');
    }
  }
  return h;
}

// "bitstring<TAB>word<TAB>count" lines, sorted by bit string then word.
inline void write_clusters(const ClusterHierarchy& h, std::ostream& out) {
  std::vector<std::size_t> order(h.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::tie(h.bits[a], h.words[a]) < std::tie(h.bits[b], h.words[b]);
  });
  for (auto i : order) out << h.bits[i] << '\t' << h.words[i] << '\t' << h.counts[i] << '\n';
}

// Loads the lookup table only; the merge tree and log are not stored.
inline ClusterHierarchy read_clusters(std::istream& in) {
  ClusterHierarchy h;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty() ||
        cols[0].find_first_not_of("01") != std::string::npos)
      throw ParseError(lineno, "expected \"bitstring<TAB>word<TAB>count\"");
    h.bits.push_back(cols[0]);
    h.words.push_back(cols[1]);
    try {
      h.counts.push_back(std::stol(cols[2]));
    } catch (const std::exception&) {
      throw ParseError(lineno, "bad count '" + cols[2] + "'");
    }
  }
  h.reindex();
  return h;
}

}  // namespace marketsieve

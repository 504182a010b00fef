#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "marketsieve/error.hpp"
#include "marketsieve/text.hpp"

namespace marketsieve {

// Annotation is only allowed in the first and last this-many non-blank lines.
inline constexpr int kScopeLines = 10;

struct RawPost {
  std::string forum_id;
  std::string post_id;
  std::string title;
  std::vector<std::string> body_lines;

  // Title (when present) is line 0, followed by the body lines verbatim.
  std::vector<std::string> lines() const {
    std::vector<std::string> out;
    out.reserve(body_lines.size() + 1);
    if (!title.empty()) out.push_back(title);
    out.insert(out.end(), body_lines.begin(), body_lines.end());
    return out;
  }

  bool operator==(const RawPost&) const = default;
};

struct Token {
  std::string text;
  std::string lower;
  int line_index = 0;
  int sent_index = 0;
  int pos_in_sent = 0;
  std::optional<std::string> pos_tag;
  // Position of the syntactic head within the same sentence; -1 is root.
  std::optional<int> head;
  std::optional<std::string> deprel;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  int begin = 0;  // first token (document index)
  int end = 0;    // one past the last token
  int line_index = 0;

  int size() const { return end - begin; }
  bool operator==(const Sentence&) const = default;
};

struct Document {
  RawPost post;
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::vector<bool> scope_mask;
  std::vector<bool> vouch_mask;
  bool has_syntax = false;

  int size() const { return static_cast<int>(tokens.size()); }
  bool in_scope(int i) const { return scope_mask[static_cast<std::size_t>(i)]; }
  const Sentence& sentence_of(int i) const {
    return sentences[static_cast<std::size_t>(tokens[static_cast<std::size_t>(i)].sent_index)];
  }

  // Document index of the syntactic parent, or nullopt for roots and
  // documents without syntax.
  std::optional<int> parent(int i) const {
    const Token& t = tokens[static_cast<std::size_t>(i)];
    if (!t.head || *t.head < 0) return std::nullopt;
    return sentence_of(i).begin + *t.head;
  }

  bool operator==(const Document&) const = default;
};

enum class TradeTag { unspecified, buy, sell };

inline char trade_tag_code(TradeTag t) {
  switch (t) {
    case TradeTag::buy: return 'B';
    case TradeTag::sell: return 'S';
    default: return 'U';
  }
}

inline TradeTag trade_tag_from_code(char c) {
  switch (c) {
    case 'B': return TradeTag::buy;
    case 'S': return TradeTag::sell;
    case 'U': return TradeTag::unspecified;
    default: throw InputError(std::string("unknown trade tag '") + c + "'");
  }
}

inline bool is_flag_letter(char c) {
  return c == 'A' || c == 'D' || c == 'W' || c == 'G' || c == 'L';
}

struct AnnotationLayer {
  std::string annotator_id;
  std::map<int, TradeTag> products;
  std::string flags;  // sorted, unique letters from {A, D, G, L, W}

  bool contains(int token) const { return products.count(token) != 0; }

  void add_flag(char c) {
    if (!is_flag_letter(c)) throw InputError(std::string("unknown flag '") + c + "'");
    if (flags.find(c) == std::string::npos) {
      flags.push_back(c);
      std::sort(flags.begin(), flags.end());
    }
  }

  std::vector<int> token_indices() const {
    std::vector<int> out;
    out.reserve(products.size());
    for (const auto& [i, tag] : products) out.push_back(i);
    return out;
  }

  bool operator==(const AnnotationLayer&) const = default;
};

// One corpus entry: a document, its per-annotator layers, the merged gold
// layer, and the training-time domain label and objective weight.
struct AnnotatedPost {
  Document doc;
  std::vector<AnnotationLayer> layers;
  std::optional<AnnotationLayer> gold;
  std::string domain;
  double weight = 1.0;

  bool operator==(const AnnotatedPost&) const = default;
};

using Corpus = std::vector<AnnotatedPost>;

namespace detail {

struct TokenExtent {
  std::size_t begin;
  std::size_t end;
  bool sentence_final = false;
};

inline bool is_url(std::string_view chunk) {
  std::string lower = text::to_lower(chunk);
  return text::starts_with(lower, "http://") || text::starts_with(lower, "https://") ||
         text::starts_with(lower, "www.") || lower.find("://") != std::string::npos;
}

// "<blockquote>", "</blockquote>" and similar bare tags stay whole.
inline bool is_markup(std::string_view chunk) {
  if (chunk.size() < 3 || chunk.front() != '<' || chunk.back() != '>') return false;
  std::string_view inner = chunk.substr(1, chunk.size() - 2);
  if (!inner.empty() && inner.front() == '/') inner.remove_prefix(1);
  return !inner.empty() && std::all_of(inner.begin(), inner.end(), text::is_ascii_alpha);
}

inline bool is_terminal_punct(std::string_view tok) {
  return !tok.empty() &&
         std::all_of(tok.begin(), tok.end(), [](char c) { return c == '.' || c == '!' || c == '?'; });
}

inline bool is_numeric(std::string_view tok) {
  return !tok.empty() && text::is_digit(tok.front()) &&
         std::all_of(tok.begin(), tok.end(), [](char c) { return text::is_digit(c) || c == '.' || c == ','; });
}

inline void push_punct_runs(std::string_view line, std::size_t b, std::size_t e,
                            std::vector<TokenExtent>& out) {
  std::size_t i = b;
  while (i < e) {
    std::size_t j = i;
    while (j < e && line[j] == line[i]) ++j;
    out.push_back({i, j});
    i = j;
  }
}

inline std::size_t scan_word(std::string_view line, std::size_t i, std::size_t e) {
  while (true) {
    while (i < e && text::is_word_char(line[i])) ++i;
    if (i + 1 < e && (line[i] == '-' || line[i] == '\'') && text::is_word_char(line[i + 1])) {
      ++i;
      continue;
    }
    if (i + 1 < e && i > 0 && (line[i] == '.' || line[i] == ',') && text::is_digit(line[i - 1]) &&
        text::is_digit(line[i + 1])) {
      ++i;
      continue;
    }
    return i;
  }
}

inline void split_chunk(std::string_view line, std::size_t b, std::size_t e,
                        std::vector<TokenExtent>& out) {
  std::string_view chunk = line.substr(b, e - b);
  if (is_markup(chunk)) {
    out.push_back({b, e});
    return;
  }
  if (is_url(chunk)) {
    std::size_t url_end = e;
    while (url_end > b + 1 && std::string_view(".,;:!?)\"'").find(line[url_end - 1]) != std::string_view::npos)
      --url_end;
    out.push_back({b, url_end});
    push_punct_runs(line, url_end, e, out);
    return;
  }
  std::size_t i = b;
  while (i < e) {
    char c = line[i];
    if (c == '<') {
      std::size_t close = line.substr(0, e).find('>', i);
      if (close != std::string_view::npos && is_markup(line.substr(i, close + 1 - i))) {
        out.push_back({i, close + 1});
        i = close + 1;
        continue;
      }
    }
    if (c == '$' && i + 1 < e && text::is_digit(line[i + 1])) {
      std::size_t j = scan_word(line, i + 1, e);
      out.push_back({i, j});
      i = j;
    } else if (text::is_word_char(c)) {
      std::size_t j = scan_word(line, i, e);
      if (is_numeric(line.substr(i, j - i)))
        while (j < e && line[j] == '$') ++j;
      out.push_back({i, j});
      i = j;
    } else {
      std::size_t j = i;
      while (j < e && line[j] == c) ++j;
      out.push_back({i, j});
      i = j;
    }
  }
}

// Tokenizes one line. A run of '.', '!' or '?' ends a sentence when it is
// followed by whitespace and the next token starts with an uppercase letter.
inline std::vector<TokenExtent> tokenize_line(std::string_view line) {
  std::vector<TokenExtent> out;
  std::vector<std::size_t> chunk_ends;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && text::is_space(line[i])) ++i;
    std::size_t b = i;
    while (i < line.size() && !text::is_space(line[i])) ++i;
    if (i > b) {
      split_chunk(line, b, i, out);
      chunk_ends.push_back(i);
    }
  }
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    std::string_view tok = line.substr(out[k].begin, out[k].end - out[k].begin);
    bool before_space = std::binary_search(chunk_ends.begin(), chunk_ends.end(), out[k].end);
    if (before_space && is_terminal_punct(tok) && text::is_upper(line[out[k + 1].begin]))
      out[k].sentence_final = true;
  }
  return out;
}

// Per-line vouch membership: from a "<blockquote>" line through the matching
// "</blockquote>" line inclusive; an unmatched opener runs to the end.
inline std::vector<bool> vouch_lines(const std::vector<std::string>& lines) {
  std::vector<bool> vouch(lines.size(), false);
  int depth = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string t = text::to_lower(text::trim(lines[i]));
    if (t == "<blockquote>") {
      ++depth;
      vouch[i] = true;
    } else if (depth > 0) {
      vouch[i] = true;
      if (t == "</blockquote>") --depth;
    }
  }
  return vouch;
}

// Per-line eligibility under the first/last kScopeLines non-blank lines rule.
inline std::vector<bool> window_lines(const std::vector<std::string>& lines) {
  std::vector<int> rank(lines.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (!text::is_blank(lines[i])) rank[i] = n++;
  std::vector<bool> eligible(lines.size(), false);
  for (std::size_t i = 0; i < lines.size(); ++i)
    eligible[i] = rank[i] >= 0 && (rank[i] < kScopeLines || rank[i] >= n - kScopeLines);
  return eligible;
}

}  // namespace detail

// Recomputes vouch_mask and scope_mask from the document's lines.
inline Document compute_scope_mask(Document doc) {
  const auto lines = doc.post.lines();
  const auto vouch = detail::vouch_lines(lines);
  const auto window = detail::window_lines(lines);
  doc.scope_mask.assign(doc.tokens.size(), false);
  doc.vouch_mask.assign(doc.tokens.size(), false);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    auto line = static_cast<std::size_t>(doc.tokens[i].line_index);
    doc.vouch_mask[i] = vouch[line];
    doc.scope_mask[i] = window[line] && !vouch[line];
  }
  return doc;
}

inline Document tokenize(const RawPost& raw) {
  Document doc;
  doc.post = raw;
  const auto lines = raw.lines();
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    auto extents = detail::tokenize_line(line);
    bool open = false;
    for (const auto& ext : extents) {
      if (!open) {
        Sentence s;
        s.begin = s.end = doc.size();
        s.line_index = static_cast<int>(li);
        doc.sentences.push_back(s);
        open = true;
      }
      Token t;
      t.text = line.substr(ext.begin, ext.end - ext.begin);
      t.lower = text::to_lower(t.text);
      t.line_index = static_cast<int>(li);
      t.sent_index = static_cast<int>(doc.sentences.size()) - 1;
      t.pos_in_sent = doc.sentences.back().size();
      doc.tokens.push_back(std::move(t));
      doc.sentences.back().end = doc.size();
      if (ext.sentence_final) open = false;
    }
  }
  return compute_scope_mask(std::move(doc));
}

struct Diagnostic {
  int line = 0;  // 1-based line in the annotated source
  std::string message;
};

struct ParsedPost {
  RawPost post;
  Document doc;
  AnnotationLayer layer;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

struct BraceMark {
  std::size_t begin;
  std::size_t end;
  TradeTag tag;
};

struct SourceLine {
  int source_line;  // 1-based
  std::string text;
};

inline bool is_flag_line(std::string_view line) {
  auto t = text::trim(line);
  bool any = false;
  for (char c : t) {
    if (is_flag_letter(c)) {
      any = true;
    } else if (c != ',' && !text::is_space(c)) {
      return false;
    }
  }
  return any;
}

// Matches /^\d+[\s:.]/ (or a bare number); returns the prefix length.
inline std::size_t line_number_prefix(std::string_view line, long* number) {
  std::size_t i = 0;
  while (i < line.size() && text::is_digit(line[i])) ++i;
  if (i == 0 || i > 9) return 0;
  if (i < line.size() && !text::is_space(line[i]) && line[i] != ':' && line[i] != '.') return 0;
  *number = std::stol(std::string(line.substr(0, i)));
  return i < line.size() ? i + 1 : i;
}

// Line numbers are stripped only when every non-blank line carries one and
// they strictly increase.
inline void strip_line_numbers(std::vector<SourceLine>& lines) {
  long prev = -1;
  bool any = false;
  for (const auto& l : lines) {
    if (text::is_blank(l.text)) continue;
    long n = 0;
    if (line_number_prefix(l.text, &n) == 0 || n <= prev) return;
    prev = n;
    any = true;
  }
  if (!any) return;
  for (auto& l : lines) {
    if (text::is_blank(l.text)) continue;
    long n = 0;
    l.text.erase(0, line_number_prefix(l.text, &n));
  }
}

inline std::string strip_braces(std::string_view line, int source_line, std::vector<BraceMark>& marks) {
  std::string out;
  out.reserve(line.size());
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '{' || c == '[') {
      if (i + 1 >= line.size() || text::is_space(line[i + 1])) {
        out.push_back(c);
        ++i;
        continue;
      }
      const char close = c == '{' ? '}' : ']';
      TradeTag tag = c == '{' ? TradeTag::sell : TradeTag::buy;
      std::size_t j = i + 1;
      if (c == '{' && j + 2 < line.size() && (line[j] == 'S' || line[j] == 'B') && line[j + 1] == ' ') {
        tag = line[j] == 'S' ? TradeTag::sell : TradeTag::buy;
        j += 2;
      }
      std::size_t k = line.find(close, j);
      if (k == std::string_view::npos)
        throw ParseError(source_line, std::string("unbalanced '") + c + "': no closing '" + close + "'");
      std::string_view content = line.substr(j, k - j);
      if (content.find_first_of("{}[]") != std::string_view::npos)
        throw ParseError(source_line, std::string("unbalanced or nested '") + c + "'");
      if (text::trim(content).empty()) throw ParseError(source_line, "empty annotation");
      if (std::any_of(content.begin(), content.end(), text::is_space))
        throw ParseError(source_line, "braces must enclose one whitespace-delimited token: '" +
                                          std::string(line.substr(i, k + 1 - i)) + "'");
      marks.push_back({out.size(), out.size() + content.size(), tag});
      out.append(content);
      i = k + 1;
    } else if (c == '}' || c == ']') {
      if (i > 0 && text::is_space(line[i - 1])) {
        out.push_back(c);
        ++i;
        continue;
      }
      throw ParseError(source_line, std::string("unbalanced '") + c + "': no matching opener");
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

}  // namespace detail

// Parses a post in the annotation-guide format: optional "TITLE:"/"BODY:"
// markers, optional leading line numbers, brace-marked products, an optional
// trailing flag line, and <blockquote> vouch regions. Annotations the scope
// rules forbid are dropped with a diagnostic.
inline ParsedPost parse_annotated(std::string_view source, std::string forum_id = {},
                                  std::string post_id = {}, std::string annotator_id = {}) {
  ParsedPost result;
  result.layer.annotator_id = std::move(annotator_id);

  std::vector<detail::SourceLine> lines;
  {
    int n = 0;
    for (auto& l : text::split_lines(source)) lines.push_back({++n, std::move(l)});
  }
  while (!lines.empty() && text::is_blank(lines.back().text)) lines.pop_back();
  if (!lines.empty() && detail::is_flag_line(lines.back().text)) {
    for (char c : lines.back().text)
      if (is_flag_letter(c)) result.layer.add_flag(c);
    lines.pop_back();
  }

  detail::strip_line_numbers(lines);

  // Title / body split; without markers the whole text is body.
  std::optional<detail::SourceLine> title;
  std::vector<detail::SourceLine> body;
  std::size_t first = 0;
  while (first < lines.size() && text::is_blank(lines[first].text)) ++first;
  if (first < lines.size() && text::starts_with(text::trim(lines[first].text), "TITLE:")) {
    auto t = text::trim(lines[first].text);
    title = detail::SourceLine{lines[first].source_line, std::string(text::trim(t.substr(6)))};
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
      auto t2 = text::trim(lines[i].text);
      if (text::starts_with(t2, "BODY:")) {
        auto rest = t2.substr(5);
        if (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        if (!rest.empty()) body.push_back({lines[i].source_line, std::string(rest)});
      } else {
        body.push_back(lines[i]);
      }
    }
    if (title->text.empty()) title.reset();
  } else {
    body.assign(lines.begin(), lines.end());
  }

  std::vector<detail::SourceLine> all;
  if (title) all.push_back(*title);
  all.insert(all.end(), body.begin(), body.end());

  std::vector<std::vector<detail::BraceMark>> marks(all.size());
  for (std::size_t i = 0; i < all.size(); ++i)
    all[i].text = detail::strip_braces(all[i].text, all[i].source_line, marks[i]);

  result.post.forum_id = std::move(forum_id);
  result.post.post_id = std::move(post_id);
  std::size_t b0 = 0;
  if (title) {
    result.post.title = all[0].text;
    b0 = 1;
  }
  for (std::size_t i = b0; i < all.size(); ++i) result.post.body_lines.push_back(all[i].text);

  result.doc = tokenize(result.post);
  std::vector<int> line_first(all.size() + 1, result.doc.size());
  for (int t = result.doc.size() - 1; t >= 0; --t)
    line_first[static_cast<std::size_t>(result.doc.tokens[static_cast<std::size_t>(t)].line_index)] = t;

  for (std::size_t li = 0; li < all.size(); ++li) {
    if (marks[li].empty()) continue;
    auto extents = detail::tokenize_line(all[li].text);
    for (const auto& m : marks[li]) {
      for (std::size_t k = 0; k < extents.size(); ++k) {
        const auto& e = extents[k];
        if (e.begin >= m.end || e.end <= m.begin) continue;
        std::string_view surface(all[li].text.data() + e.begin, e.end - e.begin);
        if (!std::any_of(surface.begin(), surface.end(), text::is_word_char)) continue;
        int tok = line_first[li] + static_cast<int>(k);
        if (result.doc.vouch_mask[static_cast<std::size_t>(tok)]) {
          result.diagnostics.push_back(
              {all[li].source_line, "annotation of '" + std::string(surface) + "' inside a vouch ignored"});
        } else if (!result.doc.in_scope(tok)) {
          result.diagnostics.push_back(
              {all[li].source_line,
               "annotation of '" + std::string(surface) + "' outside the first/last 10 lines ignored"});
        } else {
          result.layer.products[tok] = m.tag;
        }
      }
    }
  }
  return result;
}

}  // namespace marketsieve

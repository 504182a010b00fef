#pragma once

#include <istream>
#include <string>
#include <vector>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/text.hpp"

namespace marketsieve {

struct SyntaxToken {
  std::string form;
  std::string pos_tag;
  int head = -1;  // 0-based position in the sentence; -1 is root
  std::string deprel;
};

using SyntaxSentence = std::vector<SyntaxToken>;

// Reads the 10-column tab-separated dependency format. Uses FORM, XPOS
// (UPOS when XPOS is "_"), HEAD and DEPREL. Comment lines and multi-word
// range rows are skipped; blank lines separate sentences.
inline std::vector<SyntaxSentence> read_conll(std::istream& in, const std::string& source = "<conll>") {
  std::vector<SyntaxSentence> out;
  SyntaxSentence current;
  std::vector<int> current_lines;
  std::string line;
  int lineno = 0;
  auto flush = [&] {
    if (current.empty()) return;
    for (std::size_t i = 0; i < current.size(); ++i) {
      int h = current[i].head;
      if (h == static_cast<int>(i) || h < -1 || h >= static_cast<int>(current.size()))
        throw ParseError(current_lines[i], source + ": sentence " + std::to_string(out.size() + 1) + " token " +
                                               std::to_string(i + 1) + ": invalid head");
    }
    out.push_back(std::move(current));
    current.clear();
    current_lines.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != 10)
      throw ParseError(lineno, source + ": expected 10 tab-separated columns, got " + std::to_string(cols.size()));
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    SyntaxToken tok;
    tok.form = cols[1];
    tok.pos_tag = cols[4] != "_" ? cols[4] : cols[3];
    try {
      tok.head = std::stoi(cols[6]) - 1;
    } catch (const std::exception&) {
      throw ParseError(lineno, source + ": non-numeric HEAD '" + cols[6] + "'");
    }
    tok.deprel = cols[7];
    current.push_back(std::move(tok));
    current_lines.push_back(lineno);
  }
  flush();
  return out;
}

namespace detail {

inline std::string unescape_ptb(const std::string& form) {
  if (form == "-LRB-") return "(";
  if (form == "-RRB-") return ")";
  if (form == "-LSB-") return "[";
  if (form == "-RSB-") return "]";
  if (form == "-LCB-") return "{";
  if (form == "-RCB-") return "}";
  return form;
}

}  // namespace detail

// Positional per-sentence alignment of parser output onto a tokenized
// document. An empty syntax list leaves the document without syntax.
inline Document attach_syntax(Document doc, const std::vector<SyntaxSentence>& syntax) {
  if (syntax.empty()) {
    doc.has_syntax = false;
    return doc;
  }
  if (syntax.size() != doc.sentences.size())
    throw AlignmentError("post " + doc.post.post_id + ": syntax has " + std::to_string(syntax.size()) +
                         " sentences, document has " + std::to_string(doc.sentences.size()));
  for (std::size_t s = 0; s < syntax.size(); ++s) {
    const Sentence& sent = doc.sentences[s];
    if (static_cast<int>(syntax[s].size()) != sent.size())
      throw AlignmentError("post " + doc.post.post_id + ": sentence " + std::to_string(s) + " has " +
                           std::to_string(sent.size()) + " tokens, syntax has " +
                           std::to_string(syntax[s].size()));
    for (int p = 0; p < sent.size(); ++p) {
      const SyntaxToken& st = syntax[s][static_cast<std::size_t>(p)];
      Token& t = doc.tokens[static_cast<std::size_t>(sent.begin + p)];
      if (detail::unescape_ptb(st.form) != t.text)
        throw AlignmentError("post " + doc.post.post_id + ": sentence " + std::to_string(s) + " position " +
                             std::to_string(p) + ": surface '" + t.text + "' vs syntax '" + st.form + "'");
      if (st.head == p || st.head < -1 || st.head >= sent.size())
        throw AlignmentError("post " + doc.post.post_id + ": sentence " + std::to_string(s) + " position " +
                             std::to_string(p) + ": invalid head");
      t.pos_tag = st.pos_tag;
      t.head = st.head;
      t.deprel = st.deprel;
    }
  }
  doc.has_syntax = true;
  return doc;
}

// Inverse of read_conll for a document that carries syntax.
inline std::string write_conll(const Document& doc) {
  std::string out;
  for (const auto& sent : doc.sentences) {
    for (int p = 0; p < sent.size(); ++p) {
      const Token& t = doc.tokens[static_cast<std::size_t>(sent.begin + p)];
      std::string pos = t.pos_tag.value_or("_");
      out += std::to_string(p + 1) + '\t' + t.text + "\t_\t" + pos + '\t' + pos + "\t_\t" +
             std::to_string(t.head.value_or(-1) + 1) + '\t' + t.deprel.value_or("_") + "\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

}  // namespace marketsieve

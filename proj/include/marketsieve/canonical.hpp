#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"

// Canonical corpus files: a header line "marketsieve-corpus v1" followed by
// one JSON record per post.
namespace marketsieve {

inline constexpr const char* kCorpusHeader = "marketsieve-corpus v1";

namespace detail {

using nlohmann::json;

inline std::string mask_string(const std::vector<bool>& mask) {
  std::string s(mask.size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s[i] = '1';
  return s;
}

inline std::vector<bool> mask_from_string(const std::string& s) {
  std::vector<bool> mask(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw InputError("mask contains '" + std::string(1, s[i]) + "'");
    mask[i] = s[i] == '1';
  }
  return mask;
}

inline json layer_to_json(const AnnotationLayer& layer) {
  json products = json::array();
  for (const auto& [i, tag] : layer.products) products.push_back({i, std::string(1, trade_tag_code(tag))});
  return {{"annotator", layer.annotator_id}, {"products", products}, {"flags", layer.flags}};
}

inline AnnotationLayer layer_from_json(const json& j) {
  AnnotationLayer layer;
  layer.annotator_id = j.at("annotator").get<std::string>();
  for (const auto& p : j.at("products")) {
    auto code = p.at(1).get<std::string>();
    if (code.size() != 1) throw InputError("bad trade tag '" + code + "'");
    layer.products[p.at(0).get<int>()] = trade_tag_from_code(code[0]);
  }
  for (char c : j.at("flags").get<std::string>()) layer.add_flag(c);
  return layer;
}

inline json to_json(const AnnotatedPost& ap) {
  const Document& d = ap.doc;
  json tokens = json::array();
  for (const auto& t : d.tokens) {
    json row = {t.text, t.line_index, t.sent_index, t.pos_in_sent, nullptr, nullptr, nullptr};
    if (t.pos_tag) row[4] = *t.pos_tag;
    if (t.head) row[5] = *t.head;
    if (t.deprel) row[6] = *t.deprel;
    tokens.push_back(std::move(row));
  }
  json sentences = json::array();
  for (const auto& s : d.sentences) sentences.push_back({s.begin, s.end, s.line_index});
  json layers = json::array();
  for (const auto& l : ap.layers) layers.push_back(layer_to_json(l));
  return {{"forum", d.post.forum_id},
          {"id", d.post.post_id},
          {"title", d.post.title},
          {"lines", d.post.body_lines},
          {"tokens", tokens},
          {"sentences", sentences},
          {"scope", mask_string(d.scope_mask)},
          {"vouch", mask_string(d.vouch_mask)},
          {"syntax", d.has_syntax},
          {"layers", layers},
          {"gold", ap.gold ? layer_to_json(*ap.gold) : json(nullptr)},
          {"domain", ap.domain},
          {"weight", ap.weight}};
}

inline void validate(const AnnotatedPost& ap) {
  const Document& d = ap.doc;
  const int n = d.size();
  const int n_lines = static_cast<int>(d.post.lines().size());
  if (static_cast<int>(d.scope_mask.size()) != n || static_cast<int>(d.vouch_mask.size()) != n)
    throw InputError("mask length does not match token count");
  int expect = 0;
  for (std::size_t s = 0; s < d.sentences.size(); ++s) {
    const auto& sent = d.sentences[s];
    if (sent.begin != expect || sent.end <= sent.begin || sent.end > n)
      throw InputError("sentence " + std::to_string(s) + " does not tile the token sequence");
    for (int i = sent.begin; i < sent.end; ++i) {
      const Token& t = d.tokens[static_cast<std::size_t>(i)];
      if (t.sent_index != static_cast<int>(s) || t.pos_in_sent != i - sent.begin || t.line_index != sent.line_index)
        throw InputError("token " + std::to_string(i) + " disagrees with its sentence");
      if (t.head && (*t.head < -1 || *t.head >= sent.size() || *t.head == t.pos_in_sent))
        throw InputError("token " + std::to_string(i) + " has an invalid head");
    }
    expect = sent.end;
  }
  if (expect != n) throw InputError("sentences do not cover all tokens");
  for (int i = 0; i < n; ++i) {
    const Token& t = d.tokens[static_cast<std::size_t>(i)];
    if (t.text.empty() || t.line_index < 0 || t.line_index >= n_lines)
      throw InputError("token " + std::to_string(i) + " is malformed");
    if (i > 0 && t.line_index < d.tokens[static_cast<std::size_t>(i - 1)].line_index)
      throw InputError("token " + std::to_string(i) + " breaks line order");
    if (d.scope_mask[static_cast<std::size_t>(i)] && d.vouch_mask[static_cast<std::size_t>(i)])
      throw InputError("token " + std::to_string(i) + " is both in scope and in a vouch");
  }
  auto check_layer = [&](const AnnotationLayer& l) {
    for (const auto& [i, tag] : l.products)
      if (i < 0 || i >= n || !d.in_scope(i))
        throw InputError("layer '" + l.annotator_id + "' annotates ineligible token " + std::to_string(i));
  };
  for (const auto& l : ap.layers) check_layer(l);
  if (ap.gold) check_layer(*ap.gold);
}

inline AnnotatedPost from_json(const json& j) {
  AnnotatedPost ap;
  Document& d = ap.doc;
  d.post.forum_id = j.at("forum").get<std::string>();
  d.post.post_id = j.at("id").get<std::string>();
  d.post.title = j.at("title").get<std::string>();
  d.post.body_lines = j.at("lines").get<std::vector<std::string>>();
  for (const auto& row : j.at("tokens")) {
    Token t;
    t.text = row.at(0).get<std::string>();
    t.lower = text::to_lower(t.text);
    t.line_index = row.at(1).get<int>();
    t.sent_index = row.at(2).get<int>();
    t.pos_in_sent = row.at(3).get<int>();
    if (!row.at(4).is_null()) t.pos_tag = row.at(4).get<std::string>();
    if (!row.at(5).is_null()) t.head = row.at(5).get<int>();
    if (!row.at(6).is_null()) t.deprel = row.at(6).get<std::string>();
    d.tokens.push_back(std::move(t));
  }
  for (const auto& s : j.at("sentences"))
    d.sentences.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()});
  d.scope_mask = mask_from_string(j.at("scope").get<std::string>());
  d.vouch_mask = mask_from_string(j.at("vouch").get<std::string>());
  d.has_syntax = j.at("syntax").get<bool>();
  for (const auto& l : j.at("layers")) ap.layers.push_back(layer_from_json(l));
  if (!j.at("gold").is_null()) ap.gold = layer_from_json(j.at("gold"));
  ap.domain = j.at("domain").get<std::string>();
  ap.weight = j.at("weight").get<double>();
  validate(ap);
  return ap;
}

}  // namespace detail

inline void write_canonical(const Corpus& corpus, std::ostream& out) {
  out << kCorpusHeader << '\n';
  for (const auto& ap : corpus) out << detail::to_json(ap).dump() << '\n';
}

inline Corpus read_canonical(std::istream& in) {
  Corpus corpus;
  std::string line;
  int lineno = 1;
  if (!std::getline(in, line) || line != kCorpusHeader)
    throw ParseError(1, std::string("missing header \"") + kCorpusHeader + "\"");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.push_back(detail::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("malformed corpus record: ") + e.what());
    } catch (const InputError& e) {
      throw ParseError(lineno, std::string("invalid corpus record: ") + e.what());
    }
  }
  return corpus;
}

inline void write_canonical(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  write_canonical(corpus, out);
}

inline Corpus read_canonical(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return read_canonical(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace marketsieve

#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "marketsieve/corpus.hpp"
#include "marketsieve/error.hpp"
#include "marketsieve/projection.hpp"

// Prediction file: a header record, then one record per post with its
// predicted spans as [sentence, start, end, head] (document token indices).
namespace marketsieve {

inline constexpr const char* kPredictionsFormat = "marketsieve-predictions v1";

struct PostPrediction {
  std::string forum;
  std::string id;
  std::vector<Span> spans;

  bool operator==(const PostPrediction&) const = default;
};

struct PredictionSet {
  std::string system;
  std::vector<PostPrediction> posts;

  bool operator==(const PredictionSet&) const = default;
};

inline PredictionSet make_predictions(std::string system, const Corpus& corpus,
                                      const std::vector<std::vector<Span>>& spans) {
  if (corpus.size() != spans.size()) throw AlignmentError("prediction count does not match corpus size");
  PredictionSet set;
  set.system = std::move(system);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    set.posts.push_back({corpus[i].doc.post.forum_id, corpus[i].doc.post.post_id, spans[i]});
  return set;
}

inline void write_predictions(const PredictionSet& set, std::ostream& out) {
  out << nlohmann::json{{"format", kPredictionsFormat}, {"system", set.system}}.dump() << '\n';
  for (const auto& p : set.posts) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& s : p.spans) spans.push_back({s.sent_index, s.start, s.end, s.head});
    out << nlohmann::json{{"forum", p.forum}, {"id", p.id}, {"spans", spans}}.dump() << '\n';
  }
}

inline PredictionSet read_predictions(std::istream& in) {
  PredictionSet set;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    try {
      if (!header) {
        if (j.value("format", "") != kPredictionsFormat) throw ParseError(lineno, "not a predictions file");
        set.system = j.value("system", "");
        header = true;
        continue;
      }
      PostPrediction p;
      p.forum = j.at("forum").get<std::string>();
      p.id = j.at("id").get<std::string>();
      for (const auto& s : j.at("spans")) {
        if (!s.is_array() || s.size() != 4) throw ParseError(lineno, "span must be [sentence, start, end, head]");
        Span sp{s[0].get<int>(), s[1].get<int>(), s[2].get<int>(), s[3].get<int>()};
        if (sp.start < 0 || sp.start >= sp.end || sp.head < sp.start || sp.head >= sp.end)
          throw ParseError(lineno, "malformed span");
        p.spans.push_back(sp);
      }
      set.posts.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad prediction record: ") + e.what());
    }
  }
  if (!header) throw ParseError(lineno, "empty predictions file");
  return set;
}

inline void save_predictions(const PredictionSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write predictions file " + path);
  write_predictions(set, out);
}

inline PredictionSet load_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open predictions file " + path);
  try {
    return read_predictions(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

// Orders predictions like the gold corpus; every gold post must have exactly
// one record and every span must fit its document.
inline std::vector<std::vector<Span>> align_predictions(const PredictionSet& set, const Corpus& gold) {
  std::map<std::pair<std::string, std::string>, const PostPrediction*> by_key;
  for (const auto& p : set.posts)
    if (!by_key.emplace(std::make_pair(p.forum, p.id), &p).second)
      throw AlignmentError("duplicate prediction for post " + p.forum + "/" + p.id);
  if (by_key.size() != gold.size())
    throw AlignmentError("predictions cover " + std::to_string(by_key.size()) + " posts, gold corpus has " +
                         std::to_string(gold.size()));
  std::vector<std::vector<Span>> out;
  for (const auto& ap : gold) {
    auto it = by_key.find({ap.doc.post.forum_id, ap.doc.post.post_id});
    if (it == by_key.end())
      throw AlignmentError("no prediction for post " + ap.doc.post.forum_id + "/" + ap.doc.post.post_id);
    for (const auto& s : it->second->spans)
      if (s.end > ap.doc.size() || s.sent_index < 0 ||
          s.sent_index >= static_cast<int>(ap.doc.sentences.size()))
        throw AlignmentError("prediction span outside post " + ap.doc.post.post_id);
    out.push_back(it->second->spans);
  }
  return out;
}

}  // namespace marketsieve

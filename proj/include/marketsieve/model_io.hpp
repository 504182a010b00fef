#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "marketsieve/error.hpp"
#include "marketsieve/learning.hpp"
#include "marketsieve/text.hpp"

// Model file:
//
//   marketsieve-model v1
//   mode <TAB> np
//   train <TAB> key=value ...
//   features <TAB> key=value ...
//   words <TAB> N          then N lines  word <TAB> count
//   vocab <TAB> M          then M lines  feature name, in index order
//   weights <TAB> K        then K lines  feature <TAB> value   (nonzero only)
//   end
namespace marketsieve {

inline constexpr const char* kModelHeader = "marketsieve-model v1";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const auto& p : text::split(s, ',')) out.push_back(std::stoi(p));
  return out;
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw ParseError(lineno_ + 1, "unexpected end of model file");
    ++lineno_;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    return l;
  }

  std::vector<std::string> record(const std::string& tag) {
    auto fields = text::split(line(), '\t');
    if (fields.empty() || fields[0] != tag) fail("expected '" + tag + "' record");
    return fields;
  }

  std::map<std::string, std::string> keyvals(const std::string& tag) {
    std::map<std::string, std::string> kv;
    auto fields = record(tag);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto eq = fields[i].find('=');
      if (eq == std::string::npos) fail("malformed field '" + fields[i] + "'");
      kv[fields[i].substr(0, eq)] = fields[i].substr(eq + 1);
    }
    return kv;
  }

  std::size_t count(const std::string& tag) {
    auto fields = record(tag);
    if (fields.size() != 2) fail("expected '" + tag + "<TAB>count'");
    return std::stoul(fields[1]);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(lineno_, what); }
  int lineno() const { return lineno_; }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

inline const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key,
                               const ModelReader& r) {
  auto it = kv.find(key);
  if (it == kv.end()) r.fail("missing key '" + key + "'");
  return it->second;
}

}  // namespace detail

inline void write_model(const LinearModel& m, std::ostream& out) {
  using detail::fmt_double;
  const auto& t = m.train;
  const auto& f = m.features;
  out << kModelHeader << '\n';
  out << "mode\t" << to_string(m.mode) << '\n';
  out << "train\titerations=" << t.iterations << "\tl1_strength=" << fmt_double(t.l1_strength)
      << "\tadagrad_eta=" << fmt_double(t.adagrad_eta) << "\tadagrad_delta=" << fmt_double(t.adagrad_delta)
      << "\tcost_fp=" << fmt_double(t.cost_fp) << "\tcost_fn=" << fmt_double(t.cost_fn)
      << "\tsingleton_weight=" << fmt_double(t.singleton_weight)
      << "\ttarget_domain_weight=" << fmt_double(t.target_domain_weight) << "\tseed=" << t.seed << '\n';
  out << "features\tcommon_word_min_count=" << f.common_word_min_count
      << "\tposition_buckets=" << detail::join_ints(f.position_buckets) << "\tchar_ngram_n=" << f.char_ngram_n
      << "\tuse_brown=" << f.use_brown << "\tbrown_prefixes=" << detail::join_ints(f.brown_prefixes)
      << "\tuse_gazetteer=" << f.use_gazetteer << "\tdomain_augment=" << f.domain_augment << '\n';
  out << "words\t" << m.vocab.word_counts().size() << '\n';
  for (const auto& [w, c] : m.vocab.word_counts()) out << w << '\t' << c << '\n';
  out << "vocab\t" << m.vocab.size() << '\n';
  for (const auto& n : m.vocab.names()) out << n << '\n';
  std::size_t nonzero = 0;
  for (double w : m.weights) nonzero += w != 0.0;
  out << "weights\t" << nonzero << '\n';
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    if (m.weights[i] != 0.0) out << m.vocab.name(static_cast<int>(i)) << '\t' << fmt_double(m.weights[i]) << '\n';
  out << "end\n";
}

inline LinearModel read_model(std::istream& in) {
  detail::ModelReader r(in);
  if (r.line() != kModelHeader) r.fail("not a marketsieve model file (bad header)");
  LinearModel m;
  auto mode = r.record("mode");
  if (mode.size() != 2) r.fail("malformed mode record");
  try {
    m.mode = mode_from_string(mode[1]);
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  try {
    auto t = r.keyvals("train");
    m.train.iterations = std::stoi(detail::need(t, "iterations", r));
    m.train.l1_strength = std::stod(detail::need(t, "l1_strength", r));
    m.train.adagrad_eta = std::stod(detail::need(t, "adagrad_eta", r));
    m.train.adagrad_delta = std::stod(detail::need(t, "adagrad_delta", r));
    m.train.cost_fp = std::stod(detail::need(t, "cost_fp", r));
    m.train.cost_fn = std::stod(detail::need(t, "cost_fn", r));
    m.train.singleton_weight = std::stod(detail::need(t, "singleton_weight", r));
    m.train.target_domain_weight = std::stod(detail::need(t, "target_domain_weight", r));
    m.train.seed = std::stoull(detail::need(t, "seed", r));
    auto f = r.keyvals("features");
    m.features.common_word_min_count = std::stoi(detail::need(f, "common_word_min_count", r));
    m.features.position_buckets = detail::parse_ints(detail::need(f, "position_buckets", r));
    m.features.char_ngram_n = std::stoi(detail::need(f, "char_ngram_n", r));
    m.features.use_brown = detail::need(f, "use_brown", r) == "1";
    m.features.brown_prefixes = detail::parse_ints(detail::need(f, "brown_prefixes", r));
    m.features.use_gazetteer = detail::need(f, "use_gazetteer", r) == "1";
    m.features.domain_augment = detail::need(f, "domain_augment", r) == "1";

    const auto n_words = r.count("words");
    for (std::size_t i = 0; i < n_words; ++i) {
      auto fields = text::split(r.line(), '\t');
      if (fields.size() != 2) r.fail("malformed word count line");
      m.vocab.count_word(fields[0], std::stol(fields[1]));
    }
    const auto n_vocab = r.count("vocab");
    for (std::size_t i = 0; i < n_vocab; ++i) {
      auto name = r.line();
      if (m.vocab.lookup(name)) r.fail("duplicate feature '" + name + "'");
      m.vocab.intern(name);
    }
    m.vocab.freeze();
    m.weights.assign(m.vocab.size(), 0.0);
    const auto n_weights = r.count("weights");
    for (std::size_t i = 0; i < n_weights; ++i) {
      auto l = r.line();
      auto tab = l.rfind('\t');
      if (tab == std::string::npos) r.fail("malformed weight line");
      auto id = m.vocab.lookup(l.substr(0, tab));
      if (!id) r.fail("weight for unknown feature '" + l.substr(0, tab) + "'");
      m.weights[static_cast<std::size_t>(*id)] = std::stod(l.substr(tab + 1));
    }
  } catch (const std::invalid_argument&) {
    r.fail("malformed number");
  } catch (const std::out_of_range&) {
    r.fail("number out of range");
  }
  if (r.line() != "end") r.fail("expected 'end'");
  return m;
}

inline void save_model(const LinearModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file " + path);
  write_model(m, out);
}

inline LinearModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + path);
  try {
    return read_model(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace marketsieve

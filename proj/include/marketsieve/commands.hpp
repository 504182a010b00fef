#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "marketsieve/marketsieve.hpp"

namespace marketsieve::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode { kOk = 0, kInputError = 1, kConfigError = 2, kInternalError = 3 };

namespace detail {

inline std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

inline std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string rpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::pair<std::string, std::string> name_value(const std::string& arg, const char* what) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw ConfigError(std::string(what) + " expects NAME=PATH, got '" + arg + "'");
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Corpus load_corpora(const std::vector<std::string>& paths) {
  Corpus all;
  for (const auto& p : paths) {
    auto c = read_canonical(p);
    all.insert(all.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  }
  return all;
}

inline std::optional<ClusterHierarchy> load_clusters(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open cluster file " + path);
  try {
    return read_clusters(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline std::optional<Gazetteer> load_gazetteer(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open gazetteer " + path);
  try {
    return read_gazetteer(in);
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline json prf_json(const PRF& m) {
  return {{"p", m.precision}, {"r", m.recall}, {"f1", m.f1}, {"tp_pred", m.tp_pred}, {"n_pred", m.n_pred},
          {"tp_gold", m.tp_gold}, {"n_gold", m.n_gold}, {"no_predictions", m.no_predictions}};
}

inline json report_json(const EvalReport& r) {
  json j{{"tokens", prf_json(r.token_prf)}, {"products", prf_json(r.type_prf)}, {"n_posts_scored", r.n_posts_scored}};
  j["post_accuracy"] = r.post_accuracy ? json(r.post_accuracy->value) : json(nullptr);
  if (r.oov) {
    j["oov"] = {{"oov_rate", r.oov->oov_rate},
                {"n_gold", r.oov->n_gold},
                {"n_oov", r.oov->n_oov},
                {"r_seen", r.oov->r_seen ? json(*r.oov->r_seen) : json(nullptr)},
                {"r_oov", r.oov->r_oov ? json(*r.oov->r_oov) : json(nullptr)}};
  }
  return j;
}

inline std::string eval_header() {
  return pad("system", 18) + "  " + pad("Tokens", 20) + "  " + pad("Products", 20) + "  Posts\n" +
         pad("", 18) + "  " + rpad("P", 6) + rpad("R", 7) + rpad("F1", 7) + "  " + rpad("P", 6) + rpad("R", 7) +
         rpad("F1", 7) + "  " + rpad("Acc", 5) + "\n";
}

inline std::string eval_row(const std::string& name, const EvalReport& r) {
  auto cells = [](const PRF& m) { return rpad(pct(m.precision), 6) + rpad(pct(m.recall), 7) + rpad(pct(m.f1), 7); };
  return pad(name, 18) + "  " + cells(r.token_prf) + "  " + cells(r.type_prf) + "  " +
         rpad(r.post_accuracy ? pct(r.post_accuracy->value) : "-", 5) + "\n";
}

// Report destination: the text table goes to stdout, machine-readable
// records to an optional JSONL file.
class Reporter {
 public:
  Reporter(std::ostream& out, std::string command, std::uint64_t config_hash, std::uint64_t seed)
      : out_(out), command_(std::move(command)), hash_(config_hash), seed_(seed) {}

  std::ostream& out() { return out_; }

  void banner() {
    out_ << "# " << command_ << "  seed=" << seed_ << "  config=" << hex64(hash_) << '\n';
  }

  void record(json j) {
    j["command"] = command_;
    j["seed"] = seed_;
    j["config_hash"] = hex64(hash_);
    records_.push_back(std::move(j));
  }

  void flush(const std::string& path) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write report " + path);
    for (const auto& r : records_) f << r.dump() << '\n';
  }

 private:
  std::ostream& out_;
  std::string command_;
  std::uint64_t hash_;
  std::uint64_t seed_;
  std::vector<json> records_;
};

struct TrainFlags {
  TrainConfig config;
  int min_common = FeatureConfig{}.common_word_min_count;

  void attach(CLI::App* sub) {
    sub->add_option("--iterations", config.iterations, "training passes")->capture_default_str();
    sub->add_option("--l1", config.l1_strength, "L1 strength per step")->capture_default_str();
    sub->add_option("--eta", config.adagrad_eta, "AdaGrad step size")->capture_default_str();
    sub->add_option("--delta", config.adagrad_delta, "AdaGrad stabilizer")->capture_default_str();
    sub->add_option("--cost-fp", config.cost_fp, "false-positive cost")->capture_default_str();
    sub->add_option("--cost-fn", config.cost_fn, "false-negative cost")->capture_default_str();
    sub->add_option("--singleton-weight", config.singleton_weight, "weight for once-seen product types")
        ->capture_default_str();
    sub->add_option("--target-weight", config.target_domain_weight, "weight of target-domain posts")
        ->capture_default_str();
    sub->add_option("--seed", config.seed, "random seed")->capture_default_str();
    sub->add_option("--common-min-count", min_common, "minimum count for word-identity features")
        ->capture_default_str();
  }

  FeatureConfig features() const {
    FeatureConfig f;
    f.common_word_min_count = min_common;
    return f;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each returns after writing its outputs; errors propagate as
// exceptions and are mapped to exit codes by run().

struct IngestArgs {
  std::vector<std::string> files;
  std::vector<std::string> layers;  // ANNOTATOR=DIR
  std::string forum;
  std::string annotator = "a1";
  std::string syntax_dir;
  std::string output;
};

inline void cmd_ingest(const IngestArgs& a, detail::Reporter& rep, std::ostream& err) {
  if (a.files.empty() == a.layers.empty())
    throw ConfigError("ingest takes either annotated files or --layer ANNOTATOR=DIR options, not both or neither");

  // post id -> (annotator, path)
  std::map<std::string, std::vector<std::pair<std::string, fs::path>>> sources;
  if (!a.files.empty()) {
    for (const auto& f : a.files) {
      fs::path p(f);
      auto& v = sources[p.stem().string()];
      if (!v.empty()) throw InputError("two input files share the post id '" + p.stem().string() + "'");
      v.emplace_back(a.annotator, p);
    }
  } else {
    std::set<std::string> seen;
    for (const auto& spec : a.layers) {
      auto [who, dir] = detail::name_value(spec, "--layer");
      if (!seen.insert(who).second) throw ConfigError("annotator '" + who + "' given twice");
      if (!fs::is_directory(dir)) throw InputError("layer directory " + dir + " does not exist");
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& p : files) sources[p.stem().string()].emplace_back(who, p);
    }
  }

  Corpus corpus;
  std::map<char, int> flag_hist;
  long tokens = 0, eligible = 0, products = 0;
  int with_syntax = 0, diagnostics = 0;
  std::map<std::size_t, int> panels;
  for (const auto& [id, files] : sources) {
    AnnotatedPost ap;
    std::optional<Document> doc;
    for (const auto& [who, path] : files) {
      ParsedPost parsed;
      try {
        parsed = parse_annotated(detail::read_file(path), a.forum, id, who);
      } catch (const ParseError& e) {
        throw InputError(path.string() + ":" + std::to_string(e.line()) + ": " + e.what());
      }
      for (const auto& d : parsed.diagnostics) {
        err << path.string() << ':' << d.line << ": " << d.message << '\n';
        ++diagnostics;
      }
      if (!doc) {
        doc = parsed.doc;
      } else if (parsed.doc.tokens != doc->tokens) {
        throw AlignmentError("annotators of post " + id + " disagree on its text (" + path.string() + ")");
      }
      ap.layers.push_back(std::move(parsed.layer));
    }
    ap.doc = std::move(*doc);
    if (!a.syntax_dir.empty()) {
      fs::path cp = fs::path(a.syntax_dir) / (id + ".conll");
      if (fs::exists(cp)) {
        std::ifstream in(cp, std::ios::binary);
        try {
          ap.doc = attach_syntax(std::move(ap.doc), read_conll(in, cp.string()));
        } catch (const ParseError& e) {
          throw InputError(cp.string() + ":" + std::to_string(e.line()) + ": " + e.what());
        } catch (const AlignmentError& e) {
          throw AlignmentError(cp.string() + ": " + e.what());
        }
      } else {
        err << cp.string() << ": no parse for post " << id << "; it will have no syntax\n";
      }
    }
    ap.gold = ap.layers.size() >= 2 ? merge_majority(ap.doc, ap.layers) : ap.layers.front();
    if (ap.layers.size() == 1) ap.gold->annotator_id = "gold";
    ap.domain = a.forum;
    tokens += ap.doc.size();
    for (int i = 0; i < ap.doc.size(); ++i) eligible += ap.doc.in_scope(i);
    products += static_cast<long>(ap.gold->products.size());
    with_syntax += ap.doc.has_syntax;
    for (char c : ap.gold->flags) ++flag_hist[c];
    ++panels[ap.layers.size()];
    corpus.push_back(std::move(ap));
  }
  write_canonical(corpus, a.output);

  auto& out = rep.out();
  rep.banner();
  out << "forum            " << a.forum << '\n'
      << "posts            " << corpus.size() << '\n'
      << "tokens           " << tokens << '\n'
      << "eligible tokens  " << eligible << '\n'
      << "gold products    " << products << '\n'
      << "posts w/ syntax  " << with_syntax << '\n'
      << "diagnostics      " << diagnostics << '\n';
  for (const auto& [n, c] : panels) out << "panel size " << n << "     " << c << " posts\n";
  json flags = json::object();
  for (const auto& [c, n] : flag_hist) {
    out << "flag " << c << "           " << n << '\n';
    flags[std::string(1, c)] = n;
  }
  rep.record({{"forum", a.forum}, {"posts", corpus.size()}, {"tokens", tokens}, {"eligible_tokens", eligible},
              {"gold_products", products}, {"posts_with_syntax", with_syntax}, {"diagnostics", diagnostics},
              {"flags", flags}, {"output", a.output}});
}

struct AgreeArgs {
  std::vector<std::string> corpora;
  bool all_tokens = false;
};

inline void cmd_agree(const AgreeArgs& a, detail::Reporter& rep) {
  Corpus corpus = detail::load_corpora(a.corpora);
  std::size_t max_panel = 0;
  for (const auto& ap : corpus) max_panel = std::max(max_panel, ap.layers.size());
  KappaOptions opts;
  opts.all_tokens = a.all_tokens;
  auto three = agreement_report(corpus, [](std::size_t n) { return n == 3; }, opts);
  std::optional<AgreementReport> all;
  if (max_panel > 3) all = agreement_report(corpus, [&](std::size_t n) { return n == max_panel; }, opts);

  auto& out = rep.out();
  rep.banner();
  out << detail::pad("panel", 16) << detail::rpad("posts", 7) << detail::rpad("tokens", 9)
      << detail::rpad("raters", 8) << detail::rpad("kappa", 8) << '\n';
  auto row = [&](const std::string& name, const std::optional<AgreementReport>& r) {
    out << detail::pad(name, 16);
    if (!r || r->n_posts == 0) {
      out << detail::rpad("-", 7) << detail::rpad("-", 9) << detail::rpad("-", 8) << detail::rpad("-", 8) << '\n';
      rep.record({{"panel", name}, {"posts", 0}, {"kappa", nullptr}});
      return;
    }
    out << detail::rpad(std::to_string(r->n_posts), 7) << detail::rpad(std::to_string(r->n_tokens), 9)
        << detail::rpad(std::to_string(r->n_annotators), 8)
        << detail::rpad(r->kappa ? detail::fixed(*r->kappa, 3) : "n/a", 8) << '\n';
    rep.record({{"panel", name}, {"posts", r->n_posts}, {"tokens", r->n_tokens}, {"raters", r->n_annotators},
                {"kappa", r->kappa ? json(*r->kappa) : json(nullptr)}});
  };
  row("3-annotated", three);
  row("all-annotated", all);
}

struct ResourceArgs {
  std::string clusters;
  std::string gazetteer;
};

struct TrainArgs {
  std::vector<std::string> corpora;
  std::vector<std::string> target;
  std::string mode = "token";
  std::string output;
  std::string tune_dev;
  bool augment = false;
  ResourceArgs res;
  detail::TrainFlags flags;
};

inline void cmd_train(const TrainArgs& a, detail::Reporter& rep) {
  const Mode mode = mode_from_string(a.mode);
  Corpus source = detail::load_corpora(a.corpora);
  for (auto& ap : source)
    if (ap.domain.empty()) ap.domain = ap.doc.post.forum_id;
  Corpus train_set = a.target.empty()
                         ? source
                         : mix_corpora(source, detail::load_corpora(a.target), a.flags.config.target_domain_weight,
                                       a.augment)
                               .posts;
  auto clusters = detail::load_clusters(a.res.clusters);
  auto gaz = detail::load_gazetteer(a.res.gazetteer);
  FeatureConfig fc = a.flags.features();
  fc.use_brown = clusters.has_value();
  fc.use_gazetteer = gaz.has_value();
  fc.domain_augment = a.augment;
  FeatureResources res{clusters ? &*clusters : nullptr, gaz ? &*gaz : nullptr};

  TrainConfig cfg = a.flags.config;
  auto& out = rep.out();
  rep.banner();
  if (!a.tune_dev.empty()) {
    Corpus dev = read_canonical(a.tune_dev);
    auto tuned = tune_costs(train_set, dev, mode, cfg, fc, res, res);
    for (const auto& [ratio, f1] : tuned.grid) {
      out << "tune cost_fn/cost_fp=" << detail::fixed(ratio, 2) << "  dev F1=" << detail::pct(f1) << '\n';
      rep.record({{"tune_ratio", ratio}, {"dev_f1", f1}});
    }
    cfg = tuned.config;
    out << "selected cost_fn=" << detail::fixed(cfg.cost_fn, 2) << " cost_fp=" << detail::fixed(cfg.cost_fp, 2)
        << '\n';
  }
  LinearModel model = train(train_set, mode, cfg, fc, res);
  save_model(model, a.output);

  std::size_t nonzero = 0;
  for (double w : model.weights) nonzero += w != 0.0;
  auto in_sample = evaluate(train_set, predict_corpus(model, train_set, res));
  out << "mode " << to_string(mode) << "  posts " << train_set.size() << "  features " << model.vocab.size()
      << "  nonzero " << nonzero << '\n';
  out << "in-sample:\n" << detail::eval_header() << detail::eval_row(to_string(mode), in_sample);
  rep.record({{"mode", to_string(mode)}, {"posts", train_set.size()}, {"features", model.vocab.size()},
              {"nonzero_weights", nonzero}, {"cost_fn", cfg.cost_fn}, {"cost_fp", cfg.cost_fp},
              {"in_sample", detail::report_json(in_sample)}, {"output", a.output}});
}

struct PredictArgs {
  std::string corpus;
  std::string model;
  std::string baseline;
  std::vector<std::string> dict_from;
  std::string level = "np";
  std::string output;
  ResourceArgs res;
};

inline void cmd_predict(const PredictArgs& a, detail::Reporter& rep) {
  if (a.model.empty() == a.baseline.empty()) throw ConfigError("predict needs exactly one of --model or --baseline");
  Corpus corpus = read_canonical(a.corpus);
  std::vector<std::vector<Span>> spans;
  std::string system;
  if (!a.model.empty()) {
    LinearModel model = load_model(a.model);
    auto clusters = detail::load_clusters(a.res.clusters);
    auto gaz = detail::load_gazetteer(a.res.gazetteer);
    if (model.features.use_brown && !clusters) throw ConfigError("this model uses Brown clusters; pass --clusters");
    if (model.features.use_gazetteer && !gaz) throw ConfigError("this model uses a gazetteer; pass --gazetteer");
    spans = predict_corpus(model, corpus, {clusters ? &*clusters : nullptr, gaz ? &*gaz : nullptr});
    system = to_string(model.mode);
  } else {
    if (a.level != "np" && a.level != "token") throw ConfigError("--level must be np or token");
    Baseline b = baseline_from_string(a.baseline);
    std::optional<Gazetteer> dict;
    if (b == Baseline::dict) {
      if (a.dict_from.empty()) throw ConfigError("the dict baseline needs --dict-from TRAIN_CORPUS");
      dict = product_dictionary(detail::load_corpora(a.dict_from));
    }
    spans = baseline_corpus(b, corpus, a.level == "np", dict ? &*dict : nullptr);
    system = a.baseline + "-" + a.level;
  }
  save_predictions(make_predictions(system, corpus, spans), a.output);
  std::size_t n = 0;
  for (const auto& s : spans) n += s.size();
  rep.banner();
  rep.out() << "system " << system << "  posts " << corpus.size() << "  predicted units " << n << '\n';
  rep.record({{"system", system}, {"posts", corpus.size()}, {"predicted_units", n}, {"output", a.output}});
}

struct EvalArgs {
  std::string gold;
  std::vector<std::string> predictions;
  std::vector<std::string> train;
  bool macro = false;
};

inline void cmd_eval(const EvalArgs& a, detail::Reporter& rep) {
  Corpus gold = read_canonical(a.gold);
  std::optional<Corpus> train;
  if (!a.train.empty()) train = detail::load_corpora(a.train);
  auto& out = rep.out();
  rep.banner();
  out << detail::eval_header();
  for (const auto& path : a.predictions) {
    auto set = load_predictions(path);
    auto spans = align_predictions(set, gold);
    auto r = evaluate(gold, spans, a.macro ? Averaging::macro : Averaging::micro, train ? &*train : nullptr);
    out << detail::eval_row(set.system, r);
    if (r.token_prf.no_predictions) out << "  (no predictions: precision reported as 0)\n";
    if (r.oov) {
      out << "  OOV rate " << detail::pct(r.oov->oov_rate) << "  R_seen "
          << (r.oov->r_seen ? detail::pct(*r.oov->r_seen) : "-") << "  R_oov "
          << (r.oov->r_oov ? detail::pct(*r.oov->r_oov) : "-") << '\n';
    }
    auto j = detail::report_json(r);
    j["system"] = set.system;
    j["predictions"] = path;
    rep.record(j);
  }
}

struct ClusterArgs {
  std::vector<std::string> corpora;
  std::vector<std::string> text_files;
  std::string forum;
  int k = BrownOptions{}.num_clusters;
  int min_count = BrownOptions{}.min_word_count;
  std::string output;
  std::string log;
};

inline void cmd_cluster(const ClusterArgs& a, detail::Reporter& rep) {
  std::vector<std::vector<std::string>> seqs;
  if (!a.corpora.empty()) {
    Corpus c = detail::load_corpora(a.corpora);
    if (!a.forum.empty())
      c.erase(std::remove_if(c.begin(), c.end(), [&](const auto& ap) { return ap.doc.post.forum_id != a.forum; }),
              c.end());
    seqs = token_stream(c);
  }
  for (const auto& f : a.text_files) {
    for (const auto& line : text::split_lines(detail::read_file(f))) {
      std::vector<std::string> seq;
      for (const auto& e : marketsieve::detail::tokenize_line(line))
        seq.push_back(text::to_lower(std::string_view(line).substr(e.begin, e.end - e.begin)));
      if (!seq.empty()) seqs.push_back(std::move(seq));
    }
  }
  BrownOptions opts;
  opts.num_clusters = a.k;
  opts.min_word_count = a.min_count;
  auto h = brown_cluster(seqs, opts);
  {
    std::ofstream f(a.output, std::ios::binary);
    if (!f) throw InputError("cannot write " + a.output);
    write_clusters(h, f);
  }
  if (!a.log.empty()) {
    std::ofstream f(a.log, std::ios::binary);
    if (!f) throw InputError("cannot write " + a.log);
    for (const auto& e : h.log) {
      f << (e.kind == ClusterEvent::Kind::insert ? "insert" : "merge") << '\t' << e.node << '\t' << e.left << '\t'
        << e.right << '\t' << marketsieve::detail::fmt_double(e.objective) << '\n';
    }
  }
  rep.banner();
  rep.out() << "sequences " << seqs.size() << "  clustered words " << h.size() << "  window " << a.k
            << "  final AMI " << detail::fixed(h.log.empty() ? 0.0 : h.log.back().objective, 6) << '\n';
  rep.record({{"sequences", seqs.size()}, {"words", h.size()}, {"num_clusters", a.k}, {"min_count", a.min_count},
              {"output", a.output}});
}

struct GazetteerArgs {
  std::vector<std::string> corpora;
  int min_count = 4;
  std::string forum;
  std::string output;
};

inline void cmd_gazetteer(const GazetteerArgs& a, detail::Reporter& rep) {
  if (a.min_count < 1) throw ConfigError("--min-count must be at least 1");
  auto g = build_gazetteer(detail::load_corpora(a.corpora), a.min_count, a.forum);
  std::ofstream f(a.output, std::ios::binary);
  if (!f) throw InputError("cannot write " + a.output);
  write_gazetteer(g, f);
  rep.banner();
  rep.out() << "forum " << g.forum << "  min_count " << g.min_count << "  entries " << g.size() << '\n';
  rep.record({{"forum", g.forum}, {"min_count", g.min_count}, {"entries", g.size()}, {"output", a.output}});
}

struct SignificanceArgs {
  std::string gold;
  std::string a;
  std::string b;
  std::string metric = "token-f1";
  int resamples = 10000;
  std::uint64_t seed = 0;
};

inline BootstrapMetric metric_from_string(const std::string& s) {
  if (s == "token-f1") return BootstrapMetric::token_f1;
  if (s == "type-f1") return BootstrapMetric::type_f1;
  if (s == "post-accuracy") return BootstrapMetric::post_accuracy;
  throw ConfigError("unknown metric '" + s + "' (expected token-f1, type-f1 or post-accuracy)");
}

inline void cmd_significance(const SignificanceArgs& a, detail::Reporter& rep) {
  const auto metric = metric_from_string(a.metric);
  Corpus gold = read_canonical(a.gold);
  auto sa = load_predictions(a.a);
  auto sb = load_predictions(a.b);
  auto posts = paired_tallies(metric, gold, align_predictions(sa, gold), align_predictions(sb, gold));
  double p = bootstrap_test(metric, posts, a.resamples, a.seed);
  rep.banner();
  rep.out() << "A " << sa.system << "  B " << sb.system << "  metric " << a.metric << "  resamples " << a.resamples
            << "  p " << detail::fixed(p, 4) << (p < 0.05 ? "  (A better, p < 0.05)" : "") << '\n';
  rep.record({{"a", a.a}, {"b", a.b}, {"metric", a.metric}, {"resamples", a.resamples}, {"p_value", p}});
}

struct XdomainArgs {
  std::vector<std::string> train;  // NAME=PATH
  std::vector<std::string> eval;   // NAME=PATH
  std::vector<std::string> variants;
  std::string clusters;
  std::string level = "np";
  int gaz_min_count = 4;
  detail::TrainFlags flags;
};

inline void cmd_xdomain(const XdomainArgs& a, detail::Reporter& rep) {
  if (a.level != "np" && a.level != "token") throw ConfigError("--level must be np or token");
  auto load = [](const std::vector<std::string>& specs, const char* what) {
    std::vector<NamedCorpus> out;
    for (const auto& s : specs) {
      auto [name, path] = detail::name_value(s, what);
      for (const auto& o : out)
        if (o.name == name) throw ConfigError(std::string(what) + " name '" + name + "' given twice");
      out.push_back({name, read_canonical(path)});
    }
    return out;
  };
  auto train_sets = load(a.train, "--train-corpus");
  auto eval_sets = load(a.eval, "--eval-corpus");
  auto clusters = detail::load_clusters(a.clusters);

  XdomainOptions opts;
  opts.phrases = a.level == "np";
  opts.train = a.flags.config;
  opts.features = a.flags.features();
  opts.clusters = clusters ? &*clusters : nullptr;
  opts.gazetteer_min_count = a.gaz_min_count;
  if (a.variants.empty()) {
    for (auto v : kAllVariants)
      if (!uses_brown(v) || clusters) opts.variants.push_back(v);
  } else {
    for (const auto& v : a.variants) opts.variants.push_back(variant_from_string(v));
  }
  auto cells = run_xdomain(train_sets, eval_sets, opts);

  auto& out = rep.out();
  rep.banner();
  out << "level " << a.level << "; cells: P R F1 Acc (percent); '-' = resource unavailable\n";
  out << detail::pad("system", 14) << detail::pad("train", 12);
  for (const auto& e : eval_sets) out << "  " << detail::pad(e.name, 27);
  out << '\n';
  std::size_t k = 0;
  for (const auto& tr : train_sets) {
    for (Variant v : opts.variants) {
      out << detail::pad(to_string(v), 14) << detail::pad(tr.name, 12);
      for (std::size_t e = 0; e < eval_sets.size(); ++e, ++k) {
        const auto& c = cells[k];
        json j{{"variant", to_string(c.variant)}, {"train", c.train_name}, {"eval", c.eval_name}, {"level", a.level}};
        if (!c.report) {
          out << "  " << detail::pad("-", 27);
          j["report"] = nullptr;
        } else {
          const auto& r = *c.report;
          out << "  " << detail::rpad(detail::pct(r.token_prf.precision), 6)
              << detail::rpad(detail::pct(r.token_prf.recall), 7) << detail::rpad(detail::pct(r.token_prf.f1), 7)
              << detail::rpad(r.post_accuracy ? detail::pct(r.post_accuracy->value) : "-", 7);
          j["report"] = detail::report_json(r);
        }
        rep.record(j);
      }
      out << '\n';
    }
  }
}

struct CurveArgs {
  std::vector<std::string> source;
  std::string target;
  std::string target_eval;
  std::vector<std::size_t> sizes{0, 20, 40, 80};
  std::string clusters;
  std::string level = "np";
  detail::TrainFlags flags;
};

inline void cmd_curve(const CurveArgs& a, detail::Reporter& rep) {
  if (a.level != "np" && a.level != "token") throw ConfigError("--level must be np or token");
  Corpus source = detail::load_corpora(a.source);
  Corpus target = read_canonical(a.target);
  Corpus target_eval = read_canonical(a.target_eval);
  auto clusters = detail::load_clusters(a.clusters);
  CurveOptions opts;
  opts.sizes = a.sizes;
  opts.phrases = a.level == "np";
  opts.train = a.flags.config;
  opts.features = a.flags.features();
  opts.clusters = clusters ? &*clusters : nullptr;
  auto points = run_curve(source, target, target_eval, opts);

  auto& out = rep.out();
  rep.banner();
  out << detail::rpad("target posts", 12) << detail::rpad("plain F1", 11) << detail::rpad("augmented F1", 14) << '\n';
  for (std::size_t i = 0; i + 1 < points.size(); i += 2) {
    out << detail::rpad(std::to_string(points[i].size), 12) << detail::rpad(detail::pct(points[i].report.token_prf.f1), 11)
        << detail::rpad(detail::pct(points[i + 1].report.token_prf.f1), 14) << '\n';
  }
  for (const auto& p : points)
    rep.record({{"target_posts", p.size}, {"augmented", p.augmented}, {"level", a.level},
                {"report", detail::report_json(p.report)}});
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Product mention extraction for cybercrime forum posts"};
  app.set_config("--config", "", "INI file with option values; sections name subcommands");
  app.require_subcommand(1);
  std::string report_path;
  app.add_option("--report", report_path, "write machine-readable JSONL records here");

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "parse annotated posts into a canonical corpus");
  s_ingest->add_option("files", ingest.files, "annotated post files (single annotator)");
  s_ingest->add_option("--layer", ingest.layers, "ANNOTATOR=DIR; files matched by name across layers");
  s_ingest->add_option("--forum", ingest.forum, "forum id")->required();
  s_ingest->add_option("--annotator", ingest.annotator, "annotator id for positional files")->capture_default_str();
  s_ingest->add_option("--syntax", ingest.syntax_dir, "directory of <post>.conll parses");
  s_ingest->add_option("-o,--output", ingest.output, "canonical corpus to write")->required();

  AgreeArgs agree;
  auto* s_agree = app.add_subcommand("agree", "inter-annotator agreement (Fleiss' kappa)");
  s_agree->add_option("corpora", agree.corpora, "canonical corpora")->required();
  s_agree->add_flag("--all-tokens", agree.all_tokens, "score every token, not only scope-eligible ones");

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "train a model");
  s_train->add_option("corpora", tr.corpora, "training corpora")->required();
  s_train->add_option("--mode", tr.mode, "token | np | post-token | post-np")->capture_default_str();
  s_train->add_option("-o,--output", tr.output, "model file to write")->required();
  s_train->add_option("--target", tr.target, "target-domain corpora, upweighted");
  s_train->add_flag("--augment", tr.augment, "conjoin every feature with the post's domain");
  s_train->add_option("--clusters", tr.res.clusters, "Brown cluster file; enables cluster features");
  s_train->add_option("--gazetteer", tr.res.gazetteer, "gazetteer file; enables the gazetteer feature");
  s_train->add_option("--tune-costs", tr.tune_dev, "dev corpus for the misclassification-cost grid search");
  tr.flags.attach(s_train);

  PredictArgs pr;
  auto* s_predict = app.add_subcommand("predict", "predict product mentions");
  s_predict->add_option("corpus", pr.corpus, "canonical corpus")->required();
  s_predict->add_option("--model", pr.model, "trained model");
  s_predict->add_option("--baseline", pr.baseline, "freq | dict | first");
  s_predict->add_option("--dict-from", pr.dict_from, "training corpora for the dict baseline");
  s_predict->add_option("--level", pr.level, "np | token (baselines)")->capture_default_str();
  s_predict->add_option("--clusters", pr.res.clusters, "Brown cluster file");
  s_predict->add_option("--gazetteer", pr.res.gazetteer, "gazetteer file (target forum)");
  s_predict->add_option("-o,--output", pr.output, "predictions file to write")->required();

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "score predictions against gold");
  s_eval->add_option("gold", ev.gold, "gold canonical corpus")->required();
  s_eval->add_option("predictions", ev.predictions, "prediction files")->required();
  s_eval->add_option("--train", ev.train, "training corpora for the OOV breakdown");
  s_eval->add_flag("--macro", ev.macro, "macro-average the product-type metric over posts");

  ClusterArgs cl;
  auto* s_cluster = app.add_subcommand("cluster", "Brown clustering");
  s_cluster->add_option("corpora", cl.corpora, "canonical corpora");
  s_cluster->add_option("--text", cl.text_files, "plain-text files, one sequence per line");
  s_cluster->add_option("--forum", cl.forum, "restrict corpora to one forum");
  s_cluster->add_option("-k,--num-clusters", cl.k, "cluster window size")->capture_default_str();
  s_cluster->add_option("--min-count", cl.min_count, "minimum word count")->capture_default_str();
  s_cluster->add_option("-o,--output", cl.output, "cluster file to write")->required();
  s_cluster->add_option("--log", cl.log, "write the merge log here");

  GazetteerArgs gz;
  auto* s_gaz = app.add_subcommand("gazetteer", "build a product gazetteer from gold annotations");
  s_gaz->add_option("corpora", gz.corpora, "training corpora")->required();
  s_gaz->add_option("--min-count", gz.min_count, "minimum annotated occurrences")->capture_default_str();
  s_gaz->add_option("--forum", gz.forum, "forum name for the header");
  s_gaz->add_option("-o,--output", gz.output, "gazetteer file to write")->required();

  SignificanceArgs sg;
  auto* s_sig = app.add_subcommand("significance", "paired bootstrap test, A better than B");
  s_sig->add_option("gold", sg.gold, "gold canonical corpus")->required();
  s_sig->add_option("a", sg.a, "predictions of system A")->required();
  s_sig->add_option("b", sg.b, "predictions of system B")->required();
  s_sig->add_option("--metric", sg.metric, "token-f1 | type-f1 | post-accuracy")->capture_default_str();
  s_sig->add_option("-B,--resamples", sg.resamples, "bootstrap resamples")->capture_default_str();
  s_sig->add_option("--seed", sg.seed, "random seed")->capture_default_str();

  XdomainArgs xd;
  auto* s_xd = app.add_subcommand("xdomain", "within- and cross-forum evaluation matrix");
  s_xd->add_option("--train-corpus", xd.train, "NAME=PATH training corpus")->required();
  s_xd->add_option("--eval-corpus", xd.eval, "NAME=PATH evaluation corpus")->required();
  s_xd->add_option("--variants", xd.variants, "Dict, Binary, Binary+Brown, Binary+Gaz, Post, Post+Brown, Post+Gaz")
      ->delimiter(',');
  s_xd->add_option("--clusters", xd.clusters, "Brown cluster file");
  s_xd->add_option("--level", xd.level, "np | token")->capture_default_str();
  s_xd->add_option("--gaz-min-count", xd.gaz_min_count, "gazetteer threshold")->capture_default_str();
  xd.flags.attach(s_xd);

  CurveArgs cv;
  auto* s_curve = app.add_subcommand("curve", "learning curve over target-domain training posts");
  s_curve->add_option("--source", cv.source, "source-domain training corpora")->required();
  s_curve->add_option("--target", cv.target, "target-domain training corpus")->required();
  s_curve->add_option("--target-eval", cv.target_eval, "target-domain evaluation corpus")->required();
  s_curve->add_option("--sizes", cv.sizes, "target post counts")->delimiter(',')->capture_default_str();
  s_curve->add_option("--clusters", cv.clusters, "Brown cluster file");
  s_curve->add_option("--level", cv.level, "np | token")->capture_default_str();
  cv.flags.attach(s_curve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::uint64_t seed = 0;
  if (sub == s_train) seed = tr.flags.config.seed;
  if (sub == s_sig) seed = sg.seed;
  if (sub == s_xd) seed = xd.flags.config.seed;
  if (sub == s_curve) seed = cv.flags.config.seed;
  detail::Reporter rep(out, sub->get_name(), text::fnv1a(sub->config_to_str(true, false)), seed);

  try {
    if (sub == s_ingest) cmd_ingest(ingest, rep, err);
    if (sub == s_agree) cmd_agree(agree, rep);
    if (sub == s_train) cmd_train(tr, rep);
    if (sub == s_predict) cmd_predict(pr, rep);
    if (sub == s_eval) cmd_eval(ev, rep);
    if (sub == s_cluster) cmd_cluster(cl, rep);
    if (sub == s_gaz) cmd_gazetteer(gz, rep);
    if (sub == s_sig) cmd_significance(sg, rep);
    if (sub == s_xd) cmd_xdomain(xd, rep);
    if (sub == s_curve) cmd_curve(cv, rep);
    rep.flush(report_path);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"marketsieve"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace marketsieve::cli

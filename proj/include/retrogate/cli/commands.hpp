#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrogate/cli/config.hpp"
#include "retrogate/eval/report.hpp"
#include "retrogate/reaction/library.hpp"
#include "retrogate/reaction/negatives.hpp"
#include "retrogate/retrieval/index.hpp"
#include "retrogate/scoring/bundle.hpp"
#include "retrogate/scoring/rgp.hpp"
#include "retrogate/search/retro_star.hpp"

namespace retrogate::cli {

using nlohmann::json;

namespace detail {

inline const std::string &require(const std::string &value, const char *key) {
  if (value.empty())
    throw Error(ErrorCode::InvalidArgument, std::string("missing required setting '") + key + "'");
  return value;
}

inline std::ofstream open_out(const std::string &path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty())
    std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write " + path);
  return out;
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out)
    throw Error(ErrorCode::Io, "cannot write " + path);
}

/// Writes "<out>.config" holding the resolved configuration.
inline void echo_config(const Config &c) {
  if (!c.out.empty())
    write_text(c.out + ".config", dump_config(c));
}

inline std::vector<reaction::Reaction> load_reactions(const std::string &path, json *issues = nullptr) {
  reaction::Corpus corpus = reaction::read_corpus(path);
  if (issues)
    for (const auto &i : corpus.issues)
      issues->push_back({{"line", i.line}, {"message", i.message}});
  return std::move(corpus.reactions);
}

inline json issues_json(const std::vector<reaction::CorpusIssue> &issues) {
  json out = json::array();
  for (const auto &i : issues)
    out.push_back({{"line", i.line}, {"message", i.message}});
  return out;
}

inline std::vector<json> read_jsonl(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty())
      continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error &e) {
      throw Error(ErrorCode::ParseError, path + " line " + std::to_string(number) + ": " + e.what(), e.byte);
    }
  }
  return rows;
}

inline scoring::Thresholds thresholds_of(const Config &c) { return {c.thr_rgp, c.thr_rp}; }

// Everything needed to score reactions, loaded from the configured paths.
struct ScoringModels {
  scoring::ReactionPrior prior;
  scoring::RgpBaseline rgp;
  retrieval::ReferenceIndex index;

  static ScoringModels load(const Config &c) {
    return {scoring::ReactionPrior::load(require(c.prior, "prior")),
            scoring::RgpBaseline::load(require(c.rgp, "rgp")),
            retrieval::ReferenceIndex::load(require(c.index, "index"))};
  }
};

} // namespace detail

/// Canonical SMILES for every line of `in`: molecules, or reaction records
/// (reaction SMILES followed by optional tab-separated fields, which are
/// kept). Malformed lines are reported with their line numbers and skipped.
inline json cmd_canonicalize(const Config &c) {
  std::ifstream in(detail::require(c.in, "in"));
  if (!in)
    throw Error(ErrorCode::Io, "cannot open " + c.in);
  std::ofstream out = detail::open_out(detail::require(c.out, "out"));
  json issues = json::array();
  std::size_t written = 0, number = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    const auto tab = line.find('\t');
    const std::string head = line.substr(0, tab), rest = tab == std::string::npos ? "" : line.substr(tab);
    try {
      const std::string canon = head.find('>') != std::string::npos
                                    ? reaction::reaction_smiles(reaction::parse_reaction(head), true)
                                    : chem::write_smiles(chem::parse_smiles(head), true);
      out << canon << rest << "\n";
      ++written;
    } catch (const Error &e) {
      json issue = {{"line", number}, {"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
      if (e.offset())
        issue["offset"] = *e.offset();
      issues.push_back(issue);
    }
  }
  detail::echo_config(c);
  return {{"written", written}, {"issues", issues}};
}

inline json cmd_extract_templates(const Config &c) {
  const auto corpus = detail::load_reactions(detail::require(c.corpus, "corpus"));
  const reaction::ExtractionResult r = reaction::extract_templates(corpus, c.template_radius);
  r.library.save(detail::require(c.out, "out"));
  detail::echo_config(c);
  json failures = json::array();
  for (const auto &[id, message] : r.failures)
    failures.push_back({{"id", id}, {"message", message}});
  return {{"reactions", corpus.size()}, {"templates", r.library.size()}, {"failures", failures}};
}

inline json cmd_build_index(const Config &c) {
  const auto corpus = detail::load_reactions(detail::require(c.corpus, "corpus"));
  const retrieval::ReferenceIndex index = retrieval::build_index(corpus);
  index.save(detail::require(c.out, "out"));
  detail::echo_config(c);
  return {{"reactions", corpus.size()},
          {"coarse_clusters", index.coarse.size()},
          {"fine_clusters", index.fine.size()},
          {"issues", index.issues.size()}};
}

inline json cmd_gen_negatives(const Config &c) {
  const auto corpus = detail::load_reactions(detail::require(c.corpus, "corpus"));
  const auto library = reaction::TemplateLibrary::load(detail::require(c.templates, "templates"), c.template_radius);
  reaction::NegativeOptions opts;
  opts.mode = reaction::parse_negative_mode(c.mode);
  opts.count = c.n;
  opts.seed = c.seed;
  opts.popularity_weighted = c.popularity_weighted;
  const auto negatives = reaction::generate_negatives(corpus, library, opts);
  std::ofstream out = detail::open_out(detail::require(c.out, "out"));
  for (const auto &r : negatives)
    out << reaction::corpus_line(r) << "\n";
  detail::echo_config(c);
  return {{"requested", c.n}, {"generated", negatives.size()}, {"mode", c.mode}};
}

/// Trains the reaction prior (model "rp") or the plausibility classifier
/// (model "rgp", which needs negatives).
inline json cmd_train(const Config &c) {
  const auto corpus = detail::load_reactions(detail::require(c.corpus, "corpus"));
  if (c.model == "rp") {
    scoring::ReactionPrior prior;
    prior.model = scoring::train_markov_model(corpus, c.markov_order, c.smoothing);
    prior.weights = {c.alpha, c.beta, c.gamma};
    prior.epsilon = c.epsilon;
    prior.template_radius = c.template_radius;
    const std::size_t reference = prior.fit_calibrator(corpus);
    prior.save(detail::require(c.out, "out"));
    detail::echo_config(c);
    return {{"model", "rp"}, {"reactions", corpus.size()}, {"calibration_reference", reference}};
  }
  if (c.model == "rgp") {
    const auto negatives = detail::load_reactions(detail::require(c.negatives, "negatives"));
    scoring::RgpTrainOptions opts;
    opts.fingerprint = {c.fp_radius, c.fp_bits};
    opts.l2 = c.l2;
    opts.epochs = c.epochs;
    opts.holdout_fraction = c.holdout_fraction;
    opts.seed = c.seed;
    const scoring::RgpTrainResult r = scoring::train_rgp_baseline(corpus, negatives, opts);
    r.classifier.save(detail::require(c.out, "out"));
    detail::echo_config(c);
    return {{"model", "rgp"},
            {"train_size", r.train_size},
            {"heldout_size", r.heldout_size},
            {"heldout_auc", r.heldout_auc},
            {"final_loss", r.loss_history.empty() ? 0.0 : r.loss_history.back()}};
  }
  throw Error(ErrorCode::InvalidArgument, "model must be rp or rgp, got '" + c.model + "'");
}

/// One ScoreBundle JSON line per input reaction.
inline json cmd_score(const Config &c) {
  json issues = json::array();
  const auto reactions = detail::load_reactions(detail::require(c.in, "in"), &issues);
  const detail::ScoringModels m = detail::ScoringModels::load(c);
  const scoring::Scorer scorer(m.prior, m.rgp, m.index, detail::thresholds_of(c));
  std::ofstream out = detail::open_out(detail::require(c.out, "out"));
  std::size_t accepted = 0, failed = 0;
  for (const auto &r : reactions) {
    const scoring::ScoreBundle b = scorer.score(r);
    accepted += b.accepted;
    failed += b.error.has_value();
    out << scoring::to_json(b).dump() << "\n";
  }
  detail::echo_config(c);
  return {{"scored", reactions.size()}, {"accepted", accepted}, {"errors", failed}, {"issues", issues}};
}

/// Threshold search over scored rows that carry a boolean "label".
/// Writes a key=value file usable as --config.
inline json cmd_calibrate(const Config &c) {
  std::vector<std::pair<scoring::ScoreBundle, bool>> rows;
  for (const json &j : detail::read_jsonl(detail::require(c.scores, "scores"))) {
    if (!j.contains("label"))
      throw Error(ErrorCode::ValidationFailed, "scored row '" + j.value("id", "") + "' has no label");
    const json &l = j.at("label");
    rows.emplace_back(scoring::bundle_from_json(j), l.is_boolean() ? l.get<bool>() : l.get<int>() != 0);
  }
  const scoring::CalibrationResult r = scoring::calibrate_thresholds(rows, c.target_precision);
  detail::write_text(detail::require(c.out, "out"),
                     "# threshold calibration\nthr_rgp=" + detail::fmt_double(r.thr_rgp) +
                         "\nthr_rp=" + detail::fmt_double(r.thr_rp) + "\n# precision=" +
                         detail::fmt_double(r.precision) + " recall=" + detail::fmt_double(r.recall) +
                         " achieved=" + (r.achieved ? "true" : "false") + "\n");
  detail::echo_config(c);
  return {{"thr_rgp", r.thr_rgp},   {"thr_rp", r.thr_rp},         {"precision", r.precision},
          {"recall", r.recall},     {"achieved", r.achieved},     {"rows", rows.size()}};
}

/// Multi-step search for `target`. With filter=true every candidate is
/// scored and meta-rejected ones are pruned; with filter=false candidates
/// are still scored (for the report) but none is dropped.
inline json cmd_plan(const Config &c) {
  const auto library = reaction::TemplateLibrary::load(detail::require(c.templates, "templates"), c.template_radius);
  const auto stock = search::BuildingBlockSet::load(detail::require(c.stock, "stock"));
  const search::TemplateGenerator generator(library, c.top_k, c.max_candidates);
  search::SearchOptions opts;
  opts.expansion_limit = c.expansion_limit;
  opts.filter = c.filter;
  std::optional<detail::ScoringModels> models;
  std::optional<scoring::Scorer> scorer;
  if (!c.prior.empty() || !c.rgp.empty() || !c.index.empty()) {
    models.emplace(detail::ScoringModels::load(c));
    scorer.emplace(models->prior, models->rgp, models->index, detail::thresholds_of(c));
    opts.score = [&](const reaction::Reaction &r) { return scorer->score(r); };
  } else if (c.filter) {
    throw Error(ErrorCode::InvalidArgument, "filter=true needs prior, rgp and index");
  }
  const search::SearchResult r = search::retro_star(detail::require(c.target, "target"), generator, stock, opts);
  json summary = {{"target", c.target},
                  {"solved", r.route.has_value()},
                  {"expansions", r.tree.expansions},
                  {"pruned", r.pruned}};
  if (r.route) {
    json report = search::route_report(*r.route);
    if (!c.out.empty())
      detail::write_text(c.out, report.dump(2) + "\n");
    summary["steps"] = r.route->steps.size();
    summary["total_cost"] = r.route->total_cost;
    if (c.out.empty())
      summary["route"] = report;
  }
  detail::echo_config(c);
  return summary;
}

/// Metrics report from a label log and scored JSONL whose ids are the
/// labels' reaction ids.
inline json cmd_eval(const Config &c) {
  const eval::LabelLog log(detail::require(c.labels, "labels"));
  std::map<std::string, eval::ScoreTable> scores;
  std::map<std::string, eval::DecisionTable> decisions;
  for (const char *name : {"RP", "RGP", "META"}) {
    scores[name];
    decisions[name];
  }
  for (const json &j : detail::read_jsonl(detail::require(c.scores, "scores"))) {
    const scoring::ScoreBundle b = scoring::bundle_from_json(j);
    if (b.error)
      continue;
    scores["RP"][b.id] = b.s_rp;
    scores["RGP"][b.id] = b.s_rgp;
    scores["META"][b.id] = b.s_meta;
    decisions["RP"][b.id] = b.s_rp > b.thr_rp;
    decisions["RGP"][b.id] = b.s_rgp > b.thr_rgp;
    decisions["META"][b.id] = b.accepted;
  }
  std::vector<eval::ReactionAnnotation> current;
  std::map<std::string, eval::ReactionAnnotation> by_reaction;
  for (const auto &a : log.all())
    by_reaction[a.reaction_id] = a;
  for (auto &[id, a] : by_reaction)
    current.push_back(a);
  json report = eval::metrics_report(current, scores, decisions);
  if (!c.out.empty())
    detail::write_text(c.out, report.dump(2) + "\n");
  detail::echo_config(c);
  return report;
}

} // namespace retrogate::cli

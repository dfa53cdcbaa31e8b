#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "acceptance.hpp"
#include "retrogate/eval/labels.hpp"
#include "retrogate/eval/metrics.hpp"
#include "retrogate/reaction/library.hpp"
#include "retrogate/reaction/negatives.hpp"
#include "retrogate/scoring/bundle.hpp"
#include "retrogate/scoring/rgp.hpp"
#include "retrogate/search/retro_star.hpp"
#include "support.hpp"

namespace retrogate::acceptance {

using reaction::Reaction;

namespace {

std::vector<Reaction> generated_negatives(const reaction::TemplateLibrary &library) {
  std::vector<Reaction> out;
  for (auto mode : {reaction::NegativeMode::Forward, reaction::NegativeMode::Retro2}) {
    reaction::NegativeOptions o;
    o.mode = mode;
    o.count = 500;
    o.seed = 42;
    const auto part = reaction::generate_negatives(corpus(), library, o);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

struct FixtureTarget {
  std::string smiles;
  int depth = 0;
};

std::vector<FixtureTarget> fixture_targets() {
  std::vector<FixtureTarget> out;
  for (const std::string &line : test_support::read_lines(test_support::data_path("search_targets.tsv"))) {
    if (line[0] == '#')
      continue;
    const auto tab = line.find('\t');
    out.push_back({line.substr(0, tab), std::stoi(line.substr(tab + 1))});
  }
  return out;
}

// Leaves in stock or made by an earlier step, last step makes the target.
bool route_is_valid(const search::Route &r, const search::BuildingBlockSet &stock, const std::string &target) {
  std::set<std::string> made;
  for (const auto &s : r.steps) {
    for (const std::string &m : s.reactants)
      if (!made.count(m) && !stock.contains_canonical(m))
        return false;
    made.insert(s.product);
  }
  return !r.steps.empty() && r.steps.back().product == target;
}

} // namespace

Outcome search_filter() {
  const auto &c = corpus();
  const reaction::TemplateLibrary library = reaction::extract_templates(c, 1).library;
  const search::BuildingBlockSet stock = search::BuildingBlockSet::load(test_support::data_path("stock.smi"));
  const search::TemplateGenerator generator(library);

  // The full scorer: token prior, plausibility classifier, precedent index,
  // thresholds calibrated to the target precision on positives vs negatives.
  const std::vector<Reaction> negatives = generated_negatives(library);
  scoring::ReactionPrior prior;
  prior.model = scoring::train_markov_model(c);
  prior.fit_calibrator(c);
  scoring::RgpTrainOptions ro;
  ro.seed = 42;
  const scoring::RgpBaseline rgp = scoring::train_rgp_baseline(c, negatives, ro).classifier;
  const retrieval::ReferenceIndex index = retrieval::build_index(c);
  std::vector<std::pair<scoring::ScoreBundle, bool>> labeled;
  {
    const scoring::Scorer provisional(prior, rgp, index);
    for (const Reaction &r : c)
      labeled.emplace_back(provisional.score(r), true);
    for (const Reaction &r : negatives)
      labeled.emplace_back(provisional.score(r), false);
  }
  const scoring::CalibrationResult cal = scoring::calibrate_thresholds(labeled, kTargetPrecision);
  const scoring::Scorer scorer(prior, rgp, index, {cal.thr_rgp, cal.thr_rp});

  Checks checks;
  const auto targets = fixture_targets();
  checks.expect(targets.size() == 50, "fixture family must hold 50 targets");
  std::map<int, std::pair<int, int>> by_depth; // depth -> (solved unfiltered, total)
  std::size_t solved_on = 0, solved_off = 0, max_expansions = 0, pruned = 0, routes_checked = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const FixtureTarget &t : targets) {
    search::SearchOptions off;
    off.expansion_limit = kExpansionLimit;
    const search::SearchResult base = search::retro_star(t.smiles, generator, stock, off);
    ++by_depth[t.depth].second;
    if (base.route) {
      ++solved_off;
      ++by_depth[t.depth].first;
      checks.expect(route_is_valid(*base.route, stock, t.smiles), "invalid route for " + t.smiles);
    } else {
      checks.expect(false, "unsolved without filter: " + t.smiles);
    }
    max_expansions = std::max(max_expansions, base.tree.expansions);
    checks.expect(base.tree.expansions <= kExpansionLimit, "expansion limit exceeded");

    search::SearchOptions on = off;
    on.score = [&](const Reaction &r) { return scorer.score(r); };
    on.filter = true;
    const search::SearchResult filtered = search::retro_star(t.smiles, generator, stock, on);
    pruned += filtered.pruned;
    // Every AND node that could be part of any route must be accepted.
    for (const search::AndNode &a : filtered.tree.ands) {
      checks.expect(a.bundle.has_value(), "unscored candidate");
      if (a.bundle && !a.bundle->accepted)
        checks.expect(a.pruned && a.children.empty(), "rejected reaction kept in tree");
    }
    if (filtered.route) {
      ++solved_on;
      ++routes_checked;
      for (const auto &s : filtered.route->steps)
        checks.expect(s.bundle && s.bundle->accepted, "route contains a meta_binary=0 reaction");
      checks.expect(route_is_valid(*filtered.route, stock, t.smiles), "invalid filtered route");
      checks.expect(base.route.has_value(), "solved with filter but not without: " + t.smiles);
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  checks.expect(secs < kSearchSeconds, "runtime over limit");
  std::ostringstream d;
  d << "unfiltered " << solved_off << "/" << targets.size() << " solved (by depth";
  for (const auto &[depth, st] : by_depth)
    d << " " << depth << ":" << st.first << "/" << st.second;
  d << "), max " << max_expansions << " expansions; filtered " << solved_on << " solved, " << pruned
    << " candidates pruned, " << routes_checked << " routes all accepted; thresholds (" << cal.thr_rgp << ", "
    << cal.thr_rp << ") precision " << cal.precision << "; " << secs << " s; " << checks.summary();
  return {checks.ok() && solved_off == targets.size(), d.str()};
}

namespace {

double brute_roc(const std::vector<double> &s, const std::vector<bool> &y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] && !y[j]) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return wins / pairs;
}

// Step-wise precision-recall area over every distinct ">= t" threshold.
double brute_pr(const std::vector<double> &s, const std::vector<bool> &y) {
  std::vector<double> thresholds(s);
  std::sort(thresholds.rbegin(), thresholds.rend());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double total = static_cast<double>(std::count(y.begin(), y.end(), true));
  double area = 0, prev_recall = 0;
  for (double t : thresholds) {
    double tp = 0, predicted = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] >= t) {
        predicted += 1;
        tp += y[i];
      }
    area += (tp / total - prev_recall) * (tp / predicted);
    prev_recall = tp / total;
  }
  return area;
}

} // namespace

Outcome metrics() {
  Checks checks;
  std::mt19937_64 rng(2024);
  std::size_t instances = 0;
  double worst = 0.0;
  while (instances < kMetricInstances) {
    const std::size_t n = 4 + rng() % 12;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 6) * 0.25;
      y[i] = rng() % 2;
    }
    if (std::count(y.begin(), y.end(), true) == 0 || std::count(y.begin(), y.end(), false) == 0)
      continue;
    const double e1 = std::fabs(eval::roc_auc(s, y) - brute_roc(s, y));
    const double e2 = std::fabs(eval::pr_auc(s, y) - brute_pr(s, y));
    worst = std::max({worst, e1, e2});
    checks.expect(e1 <= kFormulaTolerance && e2 <= kFormulaTolerance, "AUC differs from enumeration");
    ++instances;
  }

  using Sets = std::map<std::string, std::set<int>>;
  checks.expect(eval::fp_overlap(Sets{{"a", {1, 2}}, {"b", {1, 2}}}).value == 1.0, "identical sets");
  checks.expect(eval::fp_overlap(Sets{{"a", {1}}, {"b", {2}}, {"c", {3}}}).value == 0.0, "disjoint sets");
  checks.expect(eval::fp_overlap(Sets{{"a", {1, 2, 3}}, {"b", {2, 3, 4}}, {"c", {2, 5}}}).value == 0.5,
                "{1,2,3},{2,3,4},{2,5}");

  using C = eval::ConfidenceLabel;
  std::vector<C> labels = {C::SafeBet, C::Worthwhile, C::SafeBet, C::RatherNot, C::Worthwhile};
  std::sort(labels.begin(), labels.end());
  const C minimum = labels.front();
  std::size_t perms = 0;
  do {
    std::vector<eval::ReactionAnnotation> anns;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      eval::ReactionAnnotation a;
      a.reaction_id = "x" + std::to_string(i);
      a.route_id = "r";
      a.step = i;
      a.confidence = labels[i];
      a.category = labels[i] == C::SafeBet ? eval::IssueCategory::NoProblem : eval::IssueCategory::Reactivity;
      anns.push_back(a);
    }
    checks.expect(eval::path_verdict(anns).verdict == minimum, "path verdict is not the minimum");
    ++perms;
  } while (std::next_permutation(labels.begin(), labels.end()));
  std::ostringstream d;
  d << instances << " random instances (max error " << worst << "), 3 overlap fixtures, " << perms
    << " permutations; " << checks.summary();
  return {checks.ok() && perms == 30, d.str()};
}

Outcome classifier_sanity() {
  const auto &c = corpus();
  const reaction::TemplateLibrary library = reaction::extract_templates(c, 1).library;
  scoring::RgpTrainOptions opts;
  opts.seed = 42;
  const scoring::RgpTrainResult r = scoring::train_rgp_baseline(c, generated_negatives(library), opts);

  // Central finite differences against the analytic gradient.
  const scoring::FingerprintParams fp{2, 512};
  std::vector<std::vector<std::uint32_t>> xs;
  std::vector<int> ys;
  for (std::size_t i = 0; i < 60; ++i) {
    xs.push_back(scoring::reaction_features(c[i * 13], fp));
    ys.push_back(static_cast<int>(i % 2));
  }
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  const std::size_t dim = 3 * static_cast<std::size_t>(fp.n_bits) + 1;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> w(dim);
    for (double &x : w)
      x = g(rng);
    const double l2 = 0.01, h = 1e-5;
    const auto grad = scoring::LogisticModel::gradient(w, l2, xs, ys);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      std::vector<double> a = w, b = w;
      a[i] += h;
      b[i] -= h;
      const double fd =
          (scoring::LogisticModel::loss(a, l2, xs, ys) - scoring::LogisticModel::loss(b, l2, xs, ys)) / (2 * h);
      diff += (fd - grad[i]) * (fd - grad[i]);
      norm += grad[i] * grad[i];
    }
    worst = std::max(worst, std::sqrt(diff / norm));
  }
  std::ostringstream d;
  d << "held-out ROC-AUC " << r.heldout_auc << " (train " << r.train_size << ", held out " << r.heldout_size
    << ", need > " << kMinHeldOutAuc << "); gradient relative error " << worst << " (need < "
    << kGradientTolerance << ")";
  return {r.heldout_auc > kMinHeldOutAuc && worst < kGradientTolerance, d.str()};
}

} // namespace retrogate::acceptance

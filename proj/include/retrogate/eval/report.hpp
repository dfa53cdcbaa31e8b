#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrogate/eval/labels.hpp"
#include "retrogate/eval/metrics.hpp"

namespace retrogate::eval {

using ScoreTable = std::map<std::string, double>;    // reaction id -> score
using DecisionTable = std::map<std::string, bool>;   // reaction id -> accepted

struct CategoryAuc {
  double auc = 0.0;
  std::size_t negatives = 0;
  std::size_t positives = 0;
};

/// ROC-AUC of one scorer on the negatives of `category` against every
/// NoProblem reaction. Annotations without a score are ignored.
inline CategoryAuc per_category_auc(const std::vector<ReactionAnnotation> &annotations, const ScoreTable &scores,
                                    IssueCategory category) {
  std::vector<double> s;
  std::vector<bool> y;
  CategoryAuc out;
  for (const ReactionAnnotation &a : annotations) {
    auto it = scores.find(a.reaction_id);
    if (it == scores.end())
      continue;
    const BinaryLabel b = binarize(a.confidence);
    if (a.category == IssueCategory::NoProblem && b == BinaryLabel::Positive) {
      s.push_back(it->second);
      y.push_back(true);
      ++out.positives;
    } else if (a.category == category && b == BinaryLabel::Negative) {
      s.push_back(it->second);
      y.push_back(false);
      ++out.negatives;
    }
  }
  if (out.negatives == 0 || out.positives == 0)
    throw Error(ErrorCode::SingleClass, "category '" + std::string(to_string(category)) + "' lacks one class");
  out.auc = roc_auc(s, y);
  return out;
}

struct FpTn {
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t n() const noexcept { return fp + tn; }
};

/// Among negative annotations with a decision, how many the scorer accepted
/// (false positives) and rejected (true negatives), per category.
inline std::map<IssueCategory, FpTn> fp_tn_counts_by_category(const std::vector<ReactionAnnotation> &annotations,
                                                              const DecisionTable &accepted) {
  std::map<IssueCategory, FpTn> out;
  for (const ReactionAnnotation &a : annotations) {
    if (binarize(a.confidence) != BinaryLabel::Negative)
      continue;
    auto it = accepted.find(a.reaction_id);
    if (it == accepted.end())
      continue;
    auto &cell = out[a.category];
    (it->second ? cell.fp : cell.tn)++;
  }
  return out;
}

inline std::set<std::string> false_positive_ids(const std::vector<ReactionAnnotation> &annotations,
                                                const DecisionTable &accepted) {
  std::set<std::string> out;
  for (const ReactionAnnotation &a : annotations) {
    auto it = accepted.find(a.reaction_id);
    if (binarize(a.confidence) == BinaryLabel::Negative && it != accepted.end() && it->second)
      out.insert(a.reaction_id);
  }
  return out;
}

inline constexpr const char *kInsufficient = "insufficient data";

/// JSON metrics report over one snapshot of annotations. `scores` and
/// `decisions` are keyed by scorer name. Quantities that cannot be computed
/// are null with a "status" explaining why.
inline nlohmann::json metrics_report(const std::vector<ReactionAnnotation> &annotations,
                                     const std::map<std::string, ScoreTable> &scores,
                                     const std::map<std::string, DecisionTable> &decisions) {
  using nlohmann::json;
  json report;
  report["annotations"] = annotations.size();
  json conf = json::object();
  for (ConfidenceLabel c : kAllConfidence)
    conf[std::string(to_string(c))] = 0;
  json cats = json::object();
  for (IssueCategory c : kAllCategories)
    cats[std::string(to_string(c))] = 0;
  std::size_t pos = 0, neg = 0, excl = 0;
  for (const ReactionAnnotation &a : annotations) {
    conf[std::string(to_string(a.confidence))] = conf[std::string(to_string(a.confidence))].get<int>() + 1;
    cats[std::string(to_string(a.category))] = cats[std::string(to_string(a.category))].get<int>() + 1;
    switch (binarize(a.confidence)) {
    case BinaryLabel::Positive: ++pos; break;
    case BinaryLabel::Negative: ++neg; break;
    case BinaryLabel::Excluded: ++excl; break;
    }
  }
  report["confidence_counts"] = conf;
  report["category_counts"] = cats;
  report["binarized"] = {{"positive", pos}, {"negative", neg}, {"excluded", excl}};

  json scorers = json::object();
  for (const auto &[name, table] : scores) {
    json entry;
    std::vector<double> s;
    std::vector<bool> y;
    for (const ReactionAnnotation &a : annotations) {
      auto it = table.find(a.reaction_id);
      const BinaryLabel b = binarize(a.confidence);
      if (it == table.end() || b == BinaryLabel::Excluded)
        continue;
      s.push_back(it->second);
      y.push_back(b == BinaryLabel::Positive);
    }
    entry["n"] = s.size();
    const bool both = std::count(y.begin(), y.end(), true) > 0 && std::count(y.begin(), y.end(), false) > 0;
    if (both) {
      entry["roc_auc"] = roc_auc(s, y);
      entry["pr_auc"] = pr_auc(s, y);
      entry["status"] = "ok";
    } else {
      entry["roc_auc"] = nullptr;
      entry["pr_auc"] = nullptr;
      entry["status"] = kInsufficient;
    }
    json per = json::object();
    for (IssueCategory c : kAllCategories) {
      if (c == IssueCategory::NoProblem)
        continue;
      try {
        const CategoryAuc r = per_category_auc(annotations, table, c);
        per[std::string(to_string(c))] = {{"auc", r.auc}, {"negatives", r.negatives}, {"positives", r.positives}};
      } catch (const Error &) {
        per[std::string(to_string(c))] = {{"auc", nullptr}, {"status", kInsufficient}};
      }
    }
    entry["per_category"] = per;
    scorers[name] = entry;
  }
  for (const auto &[name, table] : decisions) {
    json counts = json::object();
    for (const auto &[cat, cell] : fp_tn_counts_by_category(annotations, table))
      counts[std::string(to_string(cat))] = {{"fp", cell.fp}, {"tn", cell.tn}, {"n", cell.n()}};
    scorers[name]["fp_tn"] = counts;
  }
  report["scorers"] = scorers;

  if (decisions.size() >= 2) {
    std::map<std::string, std::set<std::string>> fp_sets;
    for (const auto &[name, table] : decisions)
      fp_sets[name] = false_positive_ids(annotations, table);
    const OverlapResult o = fp_overlap(fp_sets);
    report["fp_overlap"] = {{"value", o.defined ? json(o.value) : json()},
                            {"status", o.defined ? "ok" : kInsufficient}};
  } else {
    report["fp_overlap"] = {{"value", nullptr}, {"status", kInsufficient}};
  }
  return report;
}

} // namespace retrogate::eval

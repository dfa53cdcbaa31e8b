#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "retrogate/error.hpp"

namespace retrogate::eval {

/// Probability that a random positive outranks a random negative, ties
/// counting one half (rank-sum formulation).
inline double roc_auc(const std::vector<double> &scores, const std::vector<bool> &labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::InvalidParams, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]])
      ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j); // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum += mid;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0)
    throw Error(ErrorCode::SingleClass, "ROC-AUC needs both classes");
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

/// Area under the precision-recall step curve: thresholds sweep scores in
/// descending order, tied scores entering together; each step adds
/// (recall gain) x (precision at that step). All-positive labels give 1.
inline double pr_auc(const std::vector<double> &scores, const std::vector<bool> &labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorCode::InvalidParams, "scores and labels differ in length");
  const std::size_t n = scores.size();
  const auto total_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (total_pos == 0)
    throw Error(ErrorCode::SingleClass, "PR-AUC needs at least one positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double area = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i, gained = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      gained += labels[order[j]];
      ++j;
    }
    tp += gained;
    seen = j;
    if (gained > 0)
      area += (static_cast<double>(gained) / static_cast<double>(total_pos)) *
              (static_cast<double>(tp) / static_cast<double>(seen));
    i = j;
  }
  return area;
}

struct OverlapResult {
  double value = 0.0;
  bool defined = true; // false when every set is empty (value is NaN)
};

/// |intersection of all sets| / (size of the smallest set).
template <class Id> OverlapResult fp_overlap(const std::map<std::string, std::set<Id>> &fp_sets) {
  if (fp_sets.size() < 2)
    throw Error(ErrorCode::InvalidParams, "false-positive overlap needs at least two scorers");
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  bool all_empty = true;
  for (const auto &[name, s] : fp_sets) {
    smallest = std::min(smallest, s.size());
    all_empty = all_empty && s.empty();
  }
  if (all_empty)
    return {std::numeric_limits<double>::quiet_NaN(), false};
  if (smallest == 0)
    return {0.0, true};
  std::set<Id> common = fp_sets.begin()->second;
  for (const auto &[name, s] : fp_sets) {
    std::set<Id> next;
    std::set_intersection(common.begin(), common.end(), s.begin(), s.end(), std::inserter(next, next.end()));
    common = std::move(next);
  }
  return {static_cast<double>(common.size()) / static_cast<double>(smallest), true};
}

} // namespace retrogate::eval

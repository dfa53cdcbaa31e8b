#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "retrogate/error.hpp"

namespace retrogate::eval {

/// Ordered from worst to best.
enum class ConfidenceLabel { Nonsense = 0, RatherNot = 1, Worthwhile = 2, SafeBet = 3 };

enum class IssueCategory {
  ReactantsMismatch,
  Unstable,
  Magic,
  OnePot,
  Reactivity,
  FunctionalGroupIncompatibility,
  Selectivity,
  NoProblem,
};

inline constexpr std::array<ConfidenceLabel, 4> kAllConfidence = {
    ConfidenceLabel::Nonsense, ConfidenceLabel::RatherNot, ConfidenceLabel::Worthwhile, ConfidenceLabel::SafeBet};

inline constexpr std::array<IssueCategory, 8> kAllCategories = {
    IssueCategory::ReactantsMismatch, IssueCategory::Unstable,   IssueCategory::Magic,
    IssueCategory::OnePot,            IssueCategory::Reactivity, IssueCategory::FunctionalGroupIncompatibility,
    IssueCategory::Selectivity,       IssueCategory::NoProblem};

constexpr std::string_view to_string(ConfidenceLabel c) noexcept {
  switch (c) {
  case ConfidenceLabel::Nonsense: return "Nonsense";
  case ConfidenceLabel::RatherNot: return "RatherNot";
  case ConfidenceLabel::Worthwhile: return "Worthwhile";
  case ConfidenceLabel::SafeBet: return "SafeBet";
  }
  return "?";
}

constexpr std::string_view to_string(IssueCategory c) noexcept {
  switch (c) {
  case IssueCategory::ReactantsMismatch: return "ReactantsMismatch";
  case IssueCategory::Unstable: return "Unstable";
  case IssueCategory::Magic: return "Magic";
  case IssueCategory::OnePot: return "OnePot";
  case IssueCategory::Reactivity: return "Reactivity";
  case IssueCategory::FunctionalGroupIncompatibility: return "FunctionalGroupIncompatibility";
  case IssueCategory::Selectivity: return "Selectivity";
  case IssueCategory::NoProblem: return "NoProblem";
  }
  return "?";
}

inline ConfidenceLabel parse_confidence(std::string_view s) {
  for (ConfidenceLabel c : kAllConfidence)
    if (to_string(c) == s)
      return c;
  throw Error(ErrorCode::ValidationFailed, "unknown confidence label '" + std::string(s) + "'");
}

inline IssueCategory parse_category(std::string_view s) {
  for (IssueCategory c : kAllCategories)
    if (to_string(c) == s)
      return c;
  throw Error(ErrorCode::ValidationFailed, "unknown issue category '" + std::string(s) + "'");
}

struct ReactionAnnotation {
  std::string reaction_id;
  std::string route_id;
  std::size_t step = 0;
  ConfidenceLabel confidence = ConfidenceLabel::Nonsense;
  IssueCategory category = IssueCategory::ReactantsMismatch;
  std::string note;
  std::string annotator;
  std::string timestamp;
  int protocol_step = 1; // 1..7, how far the sequential checklist got
};

/// Throws ValidationFailed unless SafeBet and NoProblem occur together and
/// the protocol step is in range.
inline void validate(const ReactionAnnotation &a) {
  if ((a.confidence == ConfidenceLabel::SafeBet) != (a.category == IssueCategory::NoProblem))
    throw Error(ErrorCode::ValidationFailed, "SafeBet must be paired with NoProblem and vice versa");
  if (a.protocol_step < 1 || a.protocol_step > 7)
    throw Error(ErrorCode::ValidationFailed, "protocol step must be between 1 and 7");
}

inline constexpr int kLabelSchemaVersion = 1;

inline nlohmann::json to_json(const ReactionAnnotation &a) {
  return {{"schema", kLabelSchemaVersion},
          {"reaction_id", a.reaction_id},
          {"route_id", a.route_id},
          {"step", a.step},
          {"confidence", std::string(to_string(a.confidence))},
          {"category", std::string(to_string(a.category))},
          {"note", a.note},
          {"annotator", a.annotator},
          {"timestamp", a.timestamp},
          {"protocol_step", a.protocol_step}};
}

/// Parses and validates one record. Missing optional fields take defaults.
inline ReactionAnnotation annotation_from_json(const nlohmann::json &j) {
  if (!j.is_object())
    throw Error(ErrorCode::ValidationFailed, "annotation must be a JSON object");
  ReactionAnnotation a;
  try {
    if (j.contains("schema") && j.at("schema").get<int>() != kLabelSchemaVersion)
      throw Error(ErrorCode::ValidationFailed, "unsupported label schema version");
    a.reaction_id = j.value("reaction_id", "");
    a.route_id = j.value("route_id", "");
    a.step = j.value("step", std::size_t{0});
    a.confidence = parse_confidence(j.at("confidence").get<std::string>());
    a.category = parse_category(j.at("category").get<std::string>());
    a.note = j.value("note", "");
    a.annotator = j.value("annotator", "");
    a.timestamp = j.value("timestamp", "");
    a.protocol_step = j.value("protocol_step", 1);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::ValidationFailed, std::string("malformed annotation: ") + e.what());
  }
  validate(a);
  return a;
}

struct PathVerdict {
  std::string route_id;
  ConfidenceLabel verdict = ConfidenceLabel::Nonsense;
  std::map<ConfidenceLabel, std::size_t> counts;
};

/// The worst confidence over the route's steps. `steps` is the route length;
/// every step 0..steps-1 needs an annotation.
inline PathVerdict path_verdict(const std::vector<ReactionAnnotation> &annotations, std::size_t steps) {
  if (steps == 0)
    throw Error(ErrorCode::IncompleteRoute, "route has no steps");
  std::vector<bool> seen(steps, false);
  PathVerdict v;
  v.verdict = ConfidenceLabel::SafeBet;
  for (const ReactionAnnotation &a : annotations) {
    if (a.step >= steps)
      throw Error(ErrorCode::IncompleteRoute, "annotation for step beyond the route");
    seen[a.step] = true;
    v.route_id = a.route_id;
    v.verdict = std::min(v.verdict, a.confidence);
    ++v.counts[a.confidence];
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw Error(ErrorCode::IncompleteRoute, "not every step is annotated");
  return v;
}

/// Route length taken as the number of annotations (one per step).
inline PathVerdict path_verdict(const std::vector<ReactionAnnotation> &annotations) {
  return path_verdict(annotations, annotations.size());
}

enum class BinaryLabel { Positive, Negative, Excluded };

inline BinaryLabel binarize(ConfidenceLabel c) {
  switch (c) {
  case ConfidenceLabel::SafeBet: return BinaryLabel::Positive;
  case ConfidenceLabel::Worthwhile: return BinaryLabel::Excluded;
  default: return BinaryLabel::Negative;
  }
}

inline std::vector<std::pair<std::string, BinaryLabel>> binarize(const std::vector<ReactionAnnotation> &annotations) {
  std::vector<std::pair<std::string, BinaryLabel>> out;
  for (const ReactionAnnotation &a : annotations)
    out.emplace_back(a.reaction_id, binarize(a.confidence));
  return out;
}

/// Append-only JSON-lines store. Appends are serialised and flushed per
/// record; the latest record per (route, step, annotator) wins.
class LabelLog {
public:
  explicit LabelLog(std::string path) : path_(std::move(path)) { reload(); }

  const std::string &path() const noexcept { return path_; }

  void append(const ReactionAnnotation &a) {
    validate(a);
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out)
      throw Error(ErrorCode::Io, "cannot append to label log " + path_);
    out << to_json(a).dump() << "\n";
    out.flush();
    if (!out)
      throw Error(ErrorCode::Io, "write to label log failed");
    records_.push_back(a);
  }

  /// Every record in append order.
  std::vector<ReactionAnnotation> all() const {
    std::lock_guard lock(mutex_);
    return records_;
  }

  /// Latest record per (route, step, annotator), in order of first key
  /// appearance.
  std::vector<ReactionAnnotation> latest() const { return latest_of(all()); }

  static std::vector<ReactionAnnotation> latest_of(const std::vector<ReactionAnnotation> &records) {
    std::map<std::tuple<std::string, std::size_t, std::string>, std::size_t> slot;
    std::vector<ReactionAnnotation> out;
    for (const ReactionAnnotation &a : records) {
      auto [it, inserted] = slot.emplace(std::make_tuple(a.route_id, a.step, a.annotator), out.size());
      if (inserted)
        out.push_back(a);
      else
        out[it->second] = a;
    }
    return out;
  }

  /// Reads the file again; a torn final line (crash mid-append) is ignored,
  /// any other malformed line is an error.
  void reload() {
    std::lock_guard lock(mutex_);
    records_.clear();
    std::ifstream in(path_);
    if (!in)
      return;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
      lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines[i].empty())
        continue;
      try {
        records_.push_back(annotation_from_json(nlohmann::json::parse(lines[i])));
      } catch (const std::exception &e) {
        if (i + 1 == lines.size())
          break;
        throw Error(ErrorCode::ParseError, "label log line " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }

private:
  std::string path_;
  mutable std::mutex mutex_;
  std::vector<ReactionAnnotation> records_;
};

} // namespace retrogate::eval

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrogate/eval/report.hpp"
#include "retrogate/scoring/meta.hpp"

namespace retrogate::service {

using nlohmann::json;
using eval::ReactionAnnotation;

/// A route loaded from the route store: the route JSON plus its id.
struct StoredRoute {
  std::string id;
  json body;
  std::size_t steps() const { return body.at("steps").size(); }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Route directory plus the append-only label log, laid out as
/// <data>/routes/*.json and <data>/labels.jsonl. Routes are read once at
/// start-up; labels are appended through one writer.
class ReviewStore {
public:
  explicit ReviewStore(const std::filesystem::path &data_dir)
      : dir_(data_dir), log_((data_dir / "labels.jsonl").string()) {
    const auto routes = data_dir / "routes";
    if (!std::filesystem::exists(routes))
      return;
    std::vector<std::filesystem::path> files;
    for (const auto &e : std::filesystem::directory_iterator(routes))
      if (e.is_regular_file() && e.path().extension() == ".json")
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
      std::ifstream in(f);
      json body;
      try {
        body = json::parse(in);
      } catch (const json::exception &e) {
        throw Error(ErrorCode::ParseError, f.string() + ": " + e.what());
      }
      if (!body.contains("steps") || !body.at("steps").is_array())
        throw Error(ErrorCode::ParseError, f.string() + ": route has no steps array");
      StoredRoute r{body.value("id", f.stem().string()), body};
      if (routes_.count(r.id))
        throw Error(ErrorCode::DuplicateId, "duplicate route id '" + r.id + "'");
      routes_.emplace(r.id, std::move(r));
    }
  }

  /// Writes a route file into the store directory (used by tools and tests).
  static void add_route(const std::filesystem::path &data_dir, const std::string &id, json body) {
    std::filesystem::create_directories(data_dir / "routes");
    body["id"] = id;
    std::ofstream out(data_dir / "routes" / (id + ".json"));
    out << body.dump(2) << "\n";
    if (!out)
      throw Error(ErrorCode::Io, "cannot write route " + id);
  }

  static std::string reaction_id(const std::string &route, std::size_t step) {
    return route + "/" + std::to_string(step);
  }

  /// Current annotation per (route, step): the most recent of the
  /// per-annotator latest records.
  std::map<std::pair<std::string, std::size_t>, ReactionAnnotation> current() const {
    std::map<std::pair<std::string, std::size_t>, ReactionAnnotation> out;
    for (const ReactionAnnotation &a : log_.all())
      out[{a.route_id, a.step}] = a;
    return out;
  }

  json list_routes() const {
    const auto cur = current();
    json out = json::array();
    for (const auto &[id, r] : routes_) {
      json s = {{"id", id}, {"target", r.body.value("target", "")}, {"steps", r.steps()}};
      s["verdict"] = verdict_json(r, cur);
      out.push_back(std::move(s));
    }
    return out;
  }

  json get_route(const std::string &id) const {
    const StoredRoute &r = route(id);
    const auto cur = current();
    const auto latest = eval::LabelLog::latest_of(log_.all());
    json body = r.body;
    body["id"] = id;
    for (std::size_t i = 0; i < r.steps(); ++i) {
      json &step = body["steps"][i];
      step["index"] = i;
      step["reaction_id"] = reaction_id(id, i);
      auto it = cur.find({id, i});
      step["annotation"] = it == cur.end() ? json() : eval::to_json(it->second);
      json by_annotator = json::array();
      for (const ReactionAnnotation &a : latest)
        if (a.route_id == id && a.step == i)
          by_annotator.push_back(eval::to_json(a));
      step["annotations"] = by_annotator;
    }
    body["verdict"] = verdict_json(r, cur);
    return body;
  }

  /// Validates and appends one label; returns the stored record.
  json post_label(const std::string &id, std::size_t step, const json &payload) {
    const StoredRoute &r = route(id);
    if (step >= r.steps())
      throw Error(ErrorCode::NotFound, "route '" + id + "' has no step " + std::to_string(step));
    json full = payload;
    if (!full.is_object())
      throw Error(ErrorCode::ValidationFailed, "label body must be a JSON object");
    full["route_id"] = id;
    full["step"] = step;
    full["reaction_id"] = reaction_id(id, step);
    if (!full.contains("timestamp") || !full["timestamp"].is_string() || full["timestamp"].get<std::string>().empty())
      full["timestamp"] = utc_timestamp();
    const ReactionAnnotation a = eval::annotation_from_json(full);
    log_.append(a);
    return eval::to_json(a);
  }

  json progress() const {
    const auto cur = current();
    std::size_t total = 0, labeled = 0, complete = 0;
    json verdicts = json::object();
    for (eval::ConfidenceLabel c : eval::kAllConfidence)
      verdicts[std::string(eval::to_string(c))] = 0;
    json per_route = json::array();
    for (const auto &[id, r] : routes_) {
      std::size_t done = 0;
      for (std::size_t i = 0; i < r.steps(); ++i)
        done += cur.count({id, i});
      total += r.steps();
      labeled += done;
      const json v = verdict_json(r, cur);
      if (!v.is_null()) {
        ++complete;
        verdicts[v.get<std::string>()] = verdicts[v.get<std::string>()].get<int>() + 1;
      }
      per_route.push_back({{"id", id}, {"labeled", done}, {"steps", r.steps()}, {"verdict", v}});
    }
    return {{"routes", routes_.size()},       {"routes_complete", complete}, {"steps_total", total},
            {"steps_labeled", labeled},       {"verdicts", verdicts},        {"per_route", per_route}};
  }

  /// Metrics over the current annotations. Scorer values come from the
  /// score bundles stored with each route step.
  json metrics() const {
    const auto cur = current();
    std::vector<ReactionAnnotation> annotations;
    std::map<std::string, eval::ScoreTable> scores;
    std::map<std::string, eval::DecisionTable> decisions;
    for (const char *name : {"RP", "RGP", "META"}) {
      scores[name];
      decisions[name];
    }
    for (const auto &[key, a] : cur) {
      annotations.push_back(a);
      const StoredRoute &r = routes_.at(key.first);
      const json &sc = r.body["steps"][key.second].value("scores", json());
      if (!sc.is_object())
        continue;
      auto num = [&](const char *k) { return sc.contains(k) && sc[k].is_number() ? sc[k].get<double>() : NAN; };
      const double rp = num("s_RP"), rgp = num("s_RGP"), meta = num("s_META"), trp = num("thr_RP"),
                   trgp = num("thr_RGP");
      const std::size_t n_ref = sc.value("n_ref", std::size_t{0});
      if (std::isfinite(rp) && std::isfinite(rgp)) {
        scores["RP"][a.reaction_id] = rp;
        scores["RGP"][a.reaction_id] = rgp;
        scores["META"][a.reaction_id] = std::isfinite(meta) ? meta : 0.0;
        decisions["RP"][a.reaction_id] = rp > trp;
        decisions["RGP"][a.reaction_id] = rgp > trgp;
        decisions["META"][a.reaction_id] = scoring::meta_binary(rgp, rp, n_ref, trgp, trp);
      }
    }
    json report = eval::metrics_report(annotations, scores, decisions);
    std::size_t conflicts = 0;
    std::map<std::pair<std::string, std::size_t>, std::set<eval::ConfidenceLabel>> seen;
    for (const ReactionAnnotation &a : eval::LabelLog::latest_of(log_.all()))
      seen[{a.route_id, a.step}].insert(a.confidence);
    for (const auto &[k, s] : seen)
      conflicts += s.size() > 1;
    report["annotator_conflicts"] = conflicts;
    json verdicts = json::object();
    for (eval::ConfidenceLabel c : eval::kAllConfidence)
      verdicts[std::string(eval::to_string(c))] = 0;
    for (const auto &[id, r] : routes_) {
      const json v = verdict_json(r, cur);
      if (!v.is_null())
        verdicts[v.get<std::string>()] = verdicts[v.get<std::string>()].get<int>() + 1;
    }
    report["path_verdicts"] = verdicts;
    return report;
  }

  std::size_t route_count() const noexcept { return routes_.size(); }
  const std::filesystem::path &data_dir() const noexcept { return dir_; }

private:
  const StoredRoute &route(const std::string &id) const {
    auto it = routes_.find(id);
    if (it == routes_.end())
      throw Error(ErrorCode::NotFound, "no route '" + id + "'");
    return it->second;
  }

  static json verdict_json(const StoredRoute &r,
                           const std::map<std::pair<std::string, std::size_t>, ReactionAnnotation> &cur) {
    std::vector<ReactionAnnotation> steps;
    for (std::size_t i = 0; i < r.steps(); ++i) {
      auto it = cur.find({r.id, i});
      if (it == cur.end())
        return nullptr;
      steps.push_back(it->second);
    }
    if (steps.empty())
      return nullptr;
    return std::string(eval::to_string(eval::path_verdict(steps, r.steps()).verdict));
  }

  std::filesystem::path dir_;
  std::map<std::string, StoredRoute> routes_;
  eval::LabelLog log_;
};

} // namespace retrogate::service

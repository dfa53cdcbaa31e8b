#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "retrogate/reaction/template.hpp"
#include "retrogate/retrieval/index.hpp"
#include "retrogate/scoring/meta.hpp"
#include "retrogate/scoring/prior.hpp"
#include "retrogate/scoring/rgp.hpp"

namespace retrogate::scoring {

struct PriorComponents {
  double s_rp = 0.0;
  double s_rc = 0.0;
  double s_regio = 0.0;
  double log_final = 0.0;
};

/// Token model plus everything needed to turn a reaction into the combined
/// prior score and its [0, 1] rank-calibrated form.
class ReactionPrior {
public:
  static constexpr int kFormatVersion = 1;

  MarkovModel model;
  ScoringWeights weights;
  double epsilon = 1e-6;
  int template_radius = 1;
  RankCalibrator calibrator;

  PriorComponents components(const Reaction &rxn) const {
    const TokenScoreBreakdown b = token_breakdown(model, rxn);
    PriorComponents c;
    c.s_rp = score_s_rp(b);
    c.s_rc = score_s_rc(b);
    c.s_regio = score_s_regio(model, rxn, reaction::extract_template(rxn, template_radius), epsilon).score;
    c.log_final = rp_final(c.s_rp, c.s_regio, c.s_rc, weights);
    return c;
  }

  /// Fits the rank calibrator on the combined scores of `reference`;
  /// reactions that cannot be scored are skipped. Returns how many were used.
  std::size_t fit_calibrator(const std::vector<Reaction> &reference) {
    std::vector<double> values;
    for (const Reaction &r : reference) {
      try {
        values.push_back(components(r).log_final);
      } catch (const Error &) {
      }
    }
    calibrator = RankCalibrator(std::move(values));
    return calibrator.reference().size();
  }

  void write(std::ostream &out) const {
    model.write(out);
    char buf[64];
    auto num = [&](double x) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return std::string(buf);
    };
    out << "# prior settings\n";
    out << "prior_version\t" << kFormatVersion << "\n";
    out << "weights\t" << num(weights.alpha) << "\t" << num(weights.beta) << "\t" << num(weights.gamma) << "\n";
    out << "epsilon\t" << num(epsilon) << "\n";
    out << "template_radius\t" << template_radius << "\n";
    out << "reference\t" << calibrator.reference().size() << "\n";
    for (double x : calibrator.reference())
      out << num(x) << "\n";
  }

  static ReactionPrior read(std::istream &in) {
    ReactionPrior p;
    p.model = MarkovModel::read(in);
    auto fail = [](const std::string &why) { return Error(ErrorCode::ParseError, "prior model: " + why); };
    std::string line;
    auto next = [&]() {
      do {
        if (!std::getline(in, line))
          throw fail("unexpected end of file");
      } while (!line.empty() && line[0] == '#');
      return line;
    };
    auto fields = [&](const std::string &name) {
      std::vector<std::string> f;
      std::stringstream ss(next());
      for (std::string x; std::getline(ss, x, '\t');)
        f.push_back(x);
      if (f.empty() || f[0] != name)
        throw fail("expected '" + name + "'");
      return f;
    };
    try {
      if (std::stoi(fields("prior_version").at(1)) != kFormatVersion)
        throw fail("unsupported version");
      const auto w = fields("weights");
      p.weights = {std::stod(w.at(1)), std::stod(w.at(2)), std::stod(w.at(3))};
      p.epsilon = std::stod(fields("epsilon").at(1));
      p.template_radius = std::stoi(fields("template_radius").at(1));
      const std::size_t n = std::stoull(fields("reference").at(1));
      std::vector<double> ref(n);
      for (double &x : ref)
        x = std::stod(next());
      if (n > 0)
        p.calibrator = RankCalibrator(std::move(ref));
    } catch (const std::logic_error &) {
      throw fail("malformed field");
    }
    p.weights.validate();
    return p;
  }

  static ReactionPrior load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open prior model " + path);
    return read(in);
  }

  void save(const std::string &path) const {
    std::ofstream out(path);
    if (!out)
      throw Error(ErrorCode::Io, "cannot write prior model " + path);
    write(out);
  }
};

/// Everything computed for one reaction. When a component cannot be
/// computed, `error` names the failure and the reaction is not accepted.
struct ScoreBundle {
  std::string id;
  double s_rp = 0.0;      // rank-calibrated combined prior, [0, 1]
  double rp_log = 0.0;    // log of the weighted product
  double S_RP = 0.0;
  double S_RC = 0.0;
  double S_Regio = 0.0;
  double s_rgp = 0.0;
  std::size_t n_ref = 0;
  double s_meta = 0.0;
  double thr_rgp = 0.0;
  double thr_rp = 0.0;
  bool accepted = false;
  std::optional<std::string> error;
};

inline nlohmann::json to_json(const ScoreBundle &b) {
  auto finite = [](double x) -> nlohmann::json { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::json j = {
      {"id", b.id},
      {"s_RP", finite(b.s_rp)},
      {"rp_log", finite(b.rp_log)},
      {"S_RP", finite(b.S_RP)},
      {"S_RC", finite(b.S_RC)},
      {"S_Regio", finite(b.S_Regio)},
      {"s_RGP", finite(b.s_rgp)},
      {"n_ref", b.n_ref},
      {"s_META", finite(b.s_meta)},
      {"thr_RGP", finite(b.thr_rgp)},
      {"thr_RP", finite(b.thr_rp)},
      {"meta_binary", b.accepted ? 1 : 0},
  };
  if (b.error)
    j["error"] = *b.error;
  return j;
}

inline ScoreBundle bundle_from_json(const nlohmann::json &j) {
  auto num = [&](const char *key) {
    const auto it = j.find(key);
    if (it == j.end())
      throw Error(ErrorCode::ParseError, std::string("score record lacks '") + key + "'");
    return it->is_null() ? std::numeric_limits<double>::quiet_NaN() : it->get<double>();
  };
  ScoreBundle b;
  b.id = j.value("id", "");
  b.s_rp = num("s_RP");
  b.rp_log = num("rp_log");
  b.S_RP = num("S_RP");
  b.S_RC = num("S_RC");
  b.S_Regio = num("S_Regio");
  b.s_rgp = num("s_RGP");
  b.n_ref = j.at("n_ref").get<std::size_t>();
  b.s_meta = num("s_META");
  b.thr_rgp = num("thr_RGP");
  b.thr_rp = num("thr_RP");
  b.accepted = j.value("meta_binary", 0) == 1;
  if (j.contains("error"))
    b.error = j.at("error").get<std::string>();
  return b;
}

struct Thresholds {
  double rgp = 0.5;
  double rp = 0.5;
};

/// Combines prior, plausibility classifier and precedent index. Holds
/// references only; scoring is const and safe to call concurrently.
class Scorer {
public:
  Scorer(const ReactionPrior &prior, const PlausibilityClassifier &rgp, const retrieval::ReferenceIndex &index,
         Thresholds thresholds = {})
      : prior_(prior), rgp_(rgp), index_(index), thresholds_(thresholds) {}

  const Thresholds &thresholds() const noexcept { return thresholds_; }

  ScoreBundle score(const Reaction &rxn) const {
    ScoreBundle b;
    b.id = rxn.id;
    b.thr_rgp = thresholds_.rgp;
    b.thr_rp = thresholds_.rp;
    b.n_ref = retrieval::n_ref(rxn, index_);
    try {
      b.s_rgp = rgp_.score(rxn);
      const PriorComponents c = prior_.components(rxn);
      b.S_RP = c.s_rp;
      b.S_RC = c.s_rc;
      b.S_Regio = c.s_regio;
      b.rp_log = c.log_final;
      b.s_rp = prior_.calibrator(c.log_final);
    } catch (const Error &e) {
      b.error = e.what();
      b.s_meta = 0.0;
      b.accepted = false;
      return b;
    }
    b.s_meta = meta_continuous(b.s_rgp, b.s_rp, b.n_ref);
    b.accepted = meta_binary(b.s_rgp, b.s_rp, b.n_ref, thresholds_.rgp, thresholds_.rp);
    return b;
  }

private:
  const ReactionPrior &prior_;
  const PlausibilityClassifier &rgp_;
  const retrieval::ReferenceIndex &index_;
  Thresholds thresholds_;
};

/// Calibration over scored reactions; bundles carrying an error are skipped.
inline CalibrationResult calibrate_thresholds(const std::vector<std::pair<ScoreBundle, bool>> &labeled,
                                              double target_precision, std::size_t grid_points = 101) {
  std::vector<LabeledScore> data;
  for (const auto &[b, positive] : labeled)
    if (!b.error)
      data.push_back({b.s_rgp, b.s_rp, b.n_ref, positive});
  return calibrate_thresholds(data, target_precision, grid_points);
}

} // namespace retrogate::scoring

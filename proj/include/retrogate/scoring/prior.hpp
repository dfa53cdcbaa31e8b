#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "retrogate/reaction/apply.hpp"
#include "retrogate/scoring/markov.hpp"

namespace retrogate::scoring {

/// Per-token log-probabilities of a serialized reaction and the tokens that
/// stand for reaction-center atoms.
struct TokenScoreBreakdown {
  std::vector<std::string> tokens;
  std::vector<double> log_probs;
  std::vector<std::size_t> center; // sorted token indices

  std::size_t T() const noexcept { return tokens.size(); }
  std::size_t T_RC() const noexcept { return center.size(); }
  double total() const {
    double s = 0.0;
    for (double lp : log_probs)
      s += lp;
    return s;
  }
};

inline TokenScoreBreakdown token_breakdown(const TokenProbabilityModel &model, const Reaction &rxn) {
  const SerializedReaction s = serialize(rxn);
  TokenScoreBreakdown b;
  b.tokens = s.tokens;
  b.log_probs = model.log_probs(s.tokens);
  std::set<std::size_t> center;
  for (const AtomRef &ref : reaction::reaction_center(rxn))
    center.insert(s.atom_token.at(ref));
  b.center.assign(center.begin(), center.end());
  return b;
}

/// Sum of token log-probabilities scaled by 1/sqrt(T).
inline double score_s_rp(const TokenScoreBreakdown &b) {
  if (b.log_probs.empty())
    throw Error(ErrorCode::EmptySequence, "reaction has no tokens");
  return b.total() / std::sqrt(static_cast<double>(b.log_probs.size()));
}

/// Mean log-probability of the reaction-center tokens.
inline double score_s_rc(const TokenScoreBreakdown &b) {
  if (b.center.empty())
    throw Error(ErrorCode::EmptyCenter, "reaction has no center tokens");
  double s = 0.0;
  for (std::size_t i : b.center)
    s += b.log_probs.at(i);
  return s / static_cast<double>(b.center.size());
}

inline double log_sum_exp(const std::vector<double> &xs) {
  if (xs.empty())
    return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m))
    return m;
  double s = 0.0;
  for (double x : xs)
    s += std::exp(x - m);
  return m + std::log(s);
}

struct RegioOutcome {
  std::string product;   // canonical SMILES
  double log_prob = 0.0; // total model log-probability of the reaction string
  std::vector<std::uint32_t> site; // reactant atoms (concatenated indexing) at the template center
};

/// Recorded outcome versus the outcomes of the same template at the other
/// matching sites. Probabilities are normalised over the enumerated set.
struct RegioBreakdown {
  double log_p_desired_raw = 0.0;
  double p_desired = 1.0;
  double p_undesired = 0.0;
  double epsilon = 1e-6;
  std::vector<RegioOutcome> alternatives;
  double score = 0.0;
};

/// Normalises the recorded and alternative log-probabilities and returns
/// log(P_desired / (P_undesired + epsilon)).
inline double regio_from_log_probs(double desired, const std::vector<double> &alternatives, double epsilon,
                                   double *p_desired = nullptr, double *p_undesired = nullptr) {
  std::vector<double> all = alternatives;
  all.push_back(desired);
  const double z = log_sum_exp(all);
  const double log_pd = desired - z;
  double pu = 0.0;
  for (double a : alternatives)
    pu += std::exp(a - z);
  if (p_desired)
    *p_desired = std::exp(log_pd);
  if (p_undesired)
    *p_undesired = pu;
  return log_pd - std::log(pu + epsilon);
}

/// Applies the reaction's own template forward at every matching site of
/// its reactants. A site is the set of reactant atoms matched by the
/// template's center; the recorded site is excluded.
inline RegioBreakdown score_s_regio(const TokenProbabilityModel &model, const Reaction &rxn,
                                    const reaction::ReactionTemplate &own, double epsilon = 1e-6) {
  if (!(epsilon > 0.0))
    throw Error(ErrorCode::InvalidParams, "epsilon must be positive");
  const auto center = reaction::reaction_center(rxn);
  std::vector<std::uint32_t> offset(rxn.reactants.size(), 0);
  for (std::size_t m = 1; m < rxn.reactants.size(); ++m)
    offset[m] = offset[m - 1] + static_cast<std::uint32_t>(rxn.reactants[m - 1].size());
  const reaction::MapIndex index(rxn);
  std::vector<bool> contributes(rxn.reactants.size(), false);
  for (const auto &[map, ref] : index.reactant_maps())
    if (index.product(map))
      contributes[ref.mol] = true;
  std::vector<std::uint32_t> recorded_site;
  bool product_center = false;
  for (const AtomRef &ref : center) {
    if (ref.side == reaction::Side::Product)
      product_center = true;
    else if (contributes[ref.mol] && rxn.reactants[ref.mol].atom(ref.atom).map)
      recorded_site.push_back(offset[ref.mol] + ref.atom);
  }
  if (!product_center)
    throw Error(ErrorCode::EmptyCenter, "reaction has no center");
  std::sort(recorded_site.begin(), recorded_site.end());

  RegioBreakdown out;
  out.epsilon = epsilon;
  auto total = [&](const chem::Molecule &product) {
    const auto lp = model.log_probs(serialize(rxn.reactants, product).tokens);
    double s = 0.0;
    for (double x : lp)
      s += x;
    return s;
  };
  out.log_p_desired_raw = total(rxn.product);

  reaction::ApplyOptions opts;
  opts.deduplicate = false;
  std::set<std::vector<std::uint32_t>> sites{recorded_site};
  std::vector<double> alt;
  for (reaction::ForwardOutcome &o : reaction::apply_template_forward(own, rxn.reactants, opts)) {
    std::vector<std::uint32_t> site;
    for (std::uint32_t p = 0; p < own.reactants.size(); ++p)
      if (own.reactants.atom(p).center)
        site.push_back(o.embedding[p]);
    std::sort(site.begin(), site.end());
    if (!sites.insert(site).second)
      continue;
    RegioOutcome r;
    r.product = o.key;
    r.log_prob = total(o.product);
    r.site = std::move(site);
    alt.push_back(r.log_prob);
    out.alternatives.push_back(std::move(r));
  }
  out.score = regio_from_log_probs(out.log_p_desired_raw, alt, epsilon, &out.p_desired, &out.p_undesired);
  return out;
}

struct ScoringWeights {
  double alpha = 1.0;
  double beta = 1.5;
  double gamma = 2.5;

  void validate() const {
    for (double w : {alpha, beta, gamma})
      if (!(w > 0.0) || !std::isfinite(w))
        throw Error(ErrorCode::InvalidParams, "scoring weights must be positive and finite");
  }
};

/// log sigmoid(x), stable for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

/// Weighted combination in the log domain of the three components mapped to
/// (0, 1]: exp(S_RP), sigmoid(S_Regio), exp(S_RC).
inline double rp_final(double s_rp, double s_regio, double s_rc, const ScoringWeights &w = {}) {
  w.validate();
  if (!std::isfinite(s_rp) || !std::isfinite(s_rc) || std::isnan(s_regio) || s_rp > 0.0 || s_rc > 0.0)
    throw Error(ErrorCode::NonPositiveComponent, "log-scale components must be finite and <= 0");
  return w.alpha * s_rp + w.beta * log_sigmoid(s_regio) + w.gamma * s_rc;
}

/// Maps raw scores to [0, 1] by their mid-rank among reference scores.
class RankCalibrator {
public:
  RankCalibrator() = default;
  explicit RankCalibrator(std::vector<double> reference) : reference_(std::move(reference)) {
    if (reference_.empty())
      throw Error(ErrorCode::EmptyCorpus, "rank calibration needs reference scores");
    std::sort(reference_.begin(), reference_.end());
  }

  bool empty() const noexcept { return reference_.empty(); }
  const std::vector<double> &reference() const noexcept { return reference_; }

  double operator()(double x) const {
    if (reference_.empty())
      throw Error(ErrorCode::InvalidParams, "rank calibrator is not fitted");
    const auto lo = std::lower_bound(reference_.begin(), reference_.end(), x);
    const auto hi = std::upper_bound(lo, reference_.end(), x);
    const double below = static_cast<double>(lo - reference_.begin());
    const double equal = static_cast<double>(hi - lo);
    return (below + 0.5 * equal) / static_cast<double>(reference_.size());
  }

private:
  std::vector<double> reference_;
};

} // namespace retrogate::scoring

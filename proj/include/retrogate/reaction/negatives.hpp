#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "retrogate/hash.hpp"
#include "retrogate/reaction/apply.hpp"
#include "retrogate/reaction/library.hpp"

namespace retrogate::reaction {

enum class NegativeMode { Forward, Retro2 };

inline std::string_view to_string(NegativeMode m) {
  return m == NegativeMode::Forward ? "forward" : "retro2";
}

inline NegativeMode parse_negative_mode(std::string_view s) {
  if (s == "forward")
    return NegativeMode::Forward;
  if (s == "retro2")
    return NegativeMode::Retro2;
  throw Error(ErrorCode::InvalidParams, "negative mode must be 'forward' or 'retro2'");
}

struct NegativeOptions {
  NegativeMode mode = NegativeMode::Forward;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  bool popularity_weighted = false;
  std::size_t attempts_per_negative = 50;
};

namespace detail {

inline Molecule strip_maps_except(const Molecule &m, bool keep) { return keep ? m : m.without_maps(); }

// Picks one of the candidate template indices, uniformly or weighted by
// popularity.
template <class Rng>
std::size_t pick_template(const TemplateLibrary &lib, const std::vector<std::size_t> &candidates,
                          bool weighted, Rng &rng) {
  if (!weighted)
    return candidates[draw_below(rng, candidates.size())];
  std::uint64_t total = 0;
  for (std::size_t i : candidates)
    total += static_cast<std::uint64_t>(lib[i].popularity);
  std::uint64_t x = draw_below(rng, total);
  for (std::size_t i : candidates) {
    const auto w = static_cast<std::uint64_t>(lib[i].popularity);
    if (x < w)
      return i;
    x -= w;
  }
  return candidates.back();
}

inline int max_map(const std::vector<Molecule> &mols) {
  int m = 0;
  for (const Molecule &mol : mols)
    for (const chem::Atom &a : mol.atoms())
      m = std::max(m, a.map.value_or(0));
  return m;
}

} // namespace detail

/// Synthetic negatives by template corruption. Each attempt draws one corpus
/// reaction; templates are then drawn from those that apply to it (the
/// library distribution conditioned on a match).
///
/// forward: a template is applied forward to the reactants of the drawn
/// reaction; products that differ from the recorded one give
/// (reactants -> wrong product) negatives.
///
/// retro2: two retro templates are applied in sequence starting from the
/// drawn product; the final reactant set paired with the original product
/// is the negative and the intermediate is discarded.
///
/// Anything whose canonical reaction key matches a positive, or an earlier
/// negative, is dropped. Throws InsufficientMatches when `count` negatives
/// cannot be produced within count * attempts_per_negative draws.
inline std::vector<Reaction> generate_negatives(const std::vector<Reaction> &corpus,
                                                const TemplateLibrary &library,
                                                const NegativeOptions &opts) {
  if (corpus.empty())
    throw Error(ErrorCode::EmptyCorpus, "no positive reactions");
  if (library.empty())
    throw Error(ErrorCode::InvalidParams, "template library is empty");
  std::set<std::string> taken;
  for (const Reaction &r : corpus)
    taken.insert(canonical_reaction_key(r));

  std::mt19937_64 rng(opts.seed);
  std::vector<Reaction> out;
  const std::size_t budget = opts.count * opts.attempts_per_negative;
  ApplyOptions apply;
  apply.max_embeddings = 256;

  auto emit = [&](Reaction rxn, const Reaction &source) {
    rxn.id = "neg-" + std::string(to_string(opts.mode)) + "-" + std::to_string(out.size());
    rxn.reaction_class = "negative:" + source.id;
    try {
      validate(rxn);
    } catch (const Error &) {
      return;
    }
    if (taken.insert(canonical_reaction_key(rxn)).second)
      out.push_back(std::move(rxn));
  };

  // Per corpus reaction: templates with at least one usable outcome, and
  // those outcomes. Filled on first draw.
  struct Options {
    bool ready = false;
    std::vector<std::size_t> templates;
    std::vector<std::vector<ForwardOutcome>> forward;
    std::vector<std::vector<RetroOutcome>> retro;
  };
  std::vector<Options> cache(corpus.size());

  for (std::size_t attempt = 0; attempt < budget && out.size() < opts.count; ++attempt) {
    const std::size_t index = draw_below(rng, corpus.size());
    const Reaction &source = corpus[index];
    Options &options = cache[index];
    if (!options.ready) {
      options.ready = true;
      const std::string recorded = chem::canonical_smiles(source.product);
      apply.first_free_map = detail::max_map(source.reactants) + 1;
      for (std::size_t t = 0; t < library.size(); ++t) {
        if (opts.mode == NegativeMode::Forward) {
          auto outcomes = apply_template_forward(library[t], source.reactants, apply);
          std::erase_if(outcomes, [&](const ForwardOutcome &o) { return o.key == recorded; });
          if (outcomes.empty())
            continue;
          options.templates.push_back(t);
          options.forward.push_back(std::move(outcomes));
        } else {
          auto outcomes = apply_template_retro(library[t], source.product, apply);
          if (outcomes.empty())
            continue;
          options.templates.push_back(t);
          options.retro.push_back(std::move(outcomes));
        }
      }
    }
    if (options.templates.empty())
      continue;
    const std::size_t t1 = detail::pick_template(library, options.templates, opts.popularity_weighted, rng);
    const std::size_t slot = static_cast<std::size_t>(
        std::find(options.templates.begin(), options.templates.end(), t1) - options.templates.begin());

    if (opts.mode == NegativeMode::Forward) {
      const auto &wrong = options.forward[slot];
      const ForwardOutcome &pick = wrong[draw_below(rng, wrong.size())];
      Reaction neg;
      for (std::uint32_t m = 0; m < source.reactants.size(); ++m) {
        const bool used = std::binary_search(pick.sources.begin(), pick.sources.end(), m);
        neg.reactants.push_back(detail::strip_maps_except(source.reactants[m], used));
      }
      neg.product = pick.product;
      emit(std::move(neg), source);
      continue;
    }

    const auto &first = options.retro[slot];
    const RetroOutcome &mid = first[draw_below(rng, first.size())];
    const std::size_t which = draw_below(rng, mid.reactants.size());
    apply.first_free_map = detail::max_map(mid.reactants) + 1;
    std::vector<std::size_t> second_templates;
    std::vector<std::vector<RetroOutcome>> second;
    for (std::size_t t = 0; t < library.size(); ++t) {
      auto outcomes = apply_template_retro(library[t], mid.reactants[which], apply);
      if (outcomes.empty())
        continue;
      second_templates.push_back(t);
      second.push_back(std::move(outcomes));
    }
    if (second_templates.empty())
      continue;
    const std::size_t t2 = detail::pick_template(library, second_templates, opts.popularity_weighted, rng);
    const auto &chosen = second[static_cast<std::size_t>(
        std::find(second_templates.begin(), second_templates.end(), t2) - second_templates.begin())];
    const RetroOutcome &last = chosen[draw_below(rng, chosen.size())];
    Reaction neg;
    for (std::size_t i = 0; i < mid.reactants.size(); ++i)
      if (i != which)
        neg.reactants.push_back(mid.reactants[i]);
    for (const Molecule &m : last.reactants)
      neg.reactants.push_back(m);
    neg.product = source.product;
    emit(std::move(neg), source);
  }
  if (out.size() < opts.count)
    throw Error(ErrorCode::InsufficientMatches,
                "produced " + std::to_string(out.size()) + " of " + std::to_string(opts.count) +
                    " negatives within " + std::to_string(budget) + " attempts");
  return out;
}

} // namespace retrogate::reaction

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "retrogate/reaction/apply.hpp"
#include "retrogate/reaction/library.hpp"

namespace retrogate::search {

using chem::Molecule;

/// One proposed disconnection. Reactants carry atom maps consistent with
/// `product`, so the pair forms a mapped reaction.
struct Candidate {
  Molecule product;                 // the queried molecule, atoms mapped 1..N
  std::vector<Molecule> reactants;  // sorted by canonical SMILES
  std::string key;                  // map-free reactant set, dot-joined
  double probability = 0.0;         // in (0, 1]
};

class SingleStepGenerator {
public:
  virtual ~SingleStepGenerator() = default;
  /// Ranked by probability (descending), deduplicated by reactant key.
  virtual std::vector<Candidate> propose(const Molecule &product) const = 0;
};

/// Copy of `mol` with atom i carrying map number i + 1.
inline Molecule with_atom_maps(const Molecule &mol) {
  auto atoms = mol.atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    atoms[i].map = static_cast<int>(i + 1);
  return Molecule(std::move(atoms), mol.bonds());
}

/// Retro-applies the `top_k` most popular templates (0: all). A reactant
/// set's weight is the summed popularity of the templates producing it;
/// probabilities are weights normalised over the returned candidates.
class TemplateGenerator final : public SingleStepGenerator {
public:
  explicit TemplateGenerator(const reaction::TemplateLibrary &library, std::size_t top_k = 0,
                             std::size_t max_candidates = 50)
      : library_(library), top_k_(top_k), max_candidates_(max_candidates) {}

  std::vector<Candidate> propose(const Molecule &product) const override {
    const Molecule mapped = with_atom_maps(product.without_maps());
    std::map<std::string, Candidate> by_key;
    std::map<std::string, double> weight;
    const std::size_t n = top_k_ == 0 ? library_.size() : std::min(top_k_, library_.size());
    reaction::ApplyOptions opts;
    opts.max_embeddings = 64;
    for (std::size_t t = 0; t < n; ++t) {
      const reaction::ReactionTemplate &tpl = library_[t];
      for (reaction::RetroOutcome &o : reaction::apply_template_retro(tpl, mapped, opts)) {
        std::string key;
        for (std::size_t i = 0; i < o.reactants.size(); ++i)
          key += (i ? "." : "") + chem::canonical_smiles(o.reactants[i].without_maps());
        weight[key] += static_cast<double>(tpl.popularity);
        if (!by_key.count(key)) {
          Candidate c;
          c.product = mapped;
          c.reactants = std::move(o.reactants);
          c.key = key;
          by_key.emplace(key, std::move(c));
        }
      }
    }
    std::vector<Candidate> out;
    double total = 0.0;
    for (auto &[key, c] : by_key) {
      total += weight[key];
      c.probability = weight[key];
      out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Candidate &a, const Candidate &b) {
      return a.probability != b.probability ? a.probability > b.probability : a.key < b.key;
    });
    if (out.size() > max_candidates_)
      out.resize(max_candidates_);
    for (Candidate &c : out)
      c.probability /= total;
    return out;
  }

private:
  const reaction::TemplateLibrary &library_;
  std::size_t top_k_;
  std::size_t max_candidates_;
};

} // namespace retrogate::search

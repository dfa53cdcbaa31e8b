#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retrogate/reaction/template.hpp"

namespace retrogate::reaction {

using Embedding = std::vector<std::uint32_t>; // pattern atom -> molecule atom

inline bool atom_matches(const PatternAtom &p, const Molecule &mol, std::uint32_t i,
                         std::size_t pattern_degree) {
  const chem::Atom &a = mol.atom(i);
  if (a.element != p.element || a.charge != p.charge || a.aromatic != p.aromatic)
    return false;
  if (p.center)
    return a.hydrogens == p.hydrogens && static_cast<int>(mol.degree(i)) == p.degree;
  return mol.degree(i) >= pattern_degree;
}

/// All subgraph monomorphisms of `pattern` into `mol` (exact on element,
/// aromatic flag, charge and bond order; center atoms also on hydrogen
/// count and degree). Stops after `limit` embeddings.
inline std::vector<Embedding> find_embeddings(const PatternGraph &pattern, const Molecule &mol,
                                              std::size_t limit = 10000) {
  std::vector<Embedding> out;
  const std::size_t n = pattern.size();
  if (n == 0 || n > mol.size())
    return out;
  // Breadth-first order per pattern component; anchor = earlier neighbour.
  std::vector<std::uint32_t> order;
  std::vector<std::optional<std::uint32_t>> anchor(n);
  std::vector<bool> placed(n, false);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (placed[s])
      continue;
    placed[s] = true;
    std::size_t head = order.size();
    order.push_back(s);
    while (head < order.size()) {
      const std::uint32_t a = order[head++];
      for (const chem::Neighbor &nb : pattern.neighbors(a))
        if (!placed[nb.atom]) {
          placed[nb.atom] = true;
          anchor[nb.atom] = a;
          order.push_back(nb.atom);
        }
    }
  }
  Embedding image(n, 0);
  std::vector<bool> assigned(n, false);
  std::vector<bool> used(mol.size(), false);

  auto consistent = [&](std::uint32_t p, std::uint32_t m) {
    if (used[m] || !atom_matches(pattern.atom(p), mol, m, pattern.neighbors(p).size()))
      return false;
    for (const chem::Neighbor &nb : pattern.neighbors(p)) {
      if (!assigned[nb.atom])
        continue;
      auto b = mol.bond_between(m, image[nb.atom]);
      if (!b || mol.bond(*b).order != pattern.bond(nb.bond).order)
        return false;
    }
    return true;
  };
  auto recurse = [&](auto &&self, std::size_t k) -> void {
    if (out.size() >= limit)
      return;
    if (k == n) {
      out.push_back(image);
      return;
    }
    const std::uint32_t p = order[k];
    auto attempt = [&](std::uint32_t m) {
      if (!consistent(p, m))
        return;
      image[p] = m;
      assigned[p] = true;
      used[m] = true;
      self(self, k + 1);
      assigned[p] = false;
      used[m] = false;
    };
    if (anchor[p]) {
      for (const chem::Neighbor &nb : mol.neighbors(image[*anchor[p]]))
        attempt(nb.atom);
    } else {
      for (std::uint32_t m = 0; m < mol.size(); ++m)
        attempt(m);
    }
  };
  recurse(recurse, 0);
  return out;
}

/// Result of rewriting a molecule through one embedding. `origin[i]` is the
/// source atom of new atom i, or nullopt for atoms the template created.
struct Rewrite {
  Molecule molecule;
  std::vector<std::optional<std::uint32_t>> origin;
};

/// Replaces the matched `from` pattern by the `to` pattern. Unmatched atoms
/// and bonds to them are kept; created atoms get fresh map numbers when the
/// input is mapped. Returns nullopt when the result is not a valid molecule
/// or a removed atom is bonded outside the pattern.
inline std::optional<Rewrite> rewrite(const PatternGraph &from, const PatternGraph &to,
                                      const Molecule &mol, const Embedding &embedding,
                                      int first_free_map = 0) {
  std::vector<std::optional<std::uint32_t>> pattern_of(mol.size());
  for (std::uint32_t p = 0; p < embedding.size(); ++p)
    pattern_of[embedding[p]] = p;

  int next_map = 0;
  for (const chem::Atom &a : mol.atoms())
    next_map = std::max(next_map, a.map.value_or(0));
  const bool mapped = next_map > 0;
  next_map = std::max(next_map + 1, first_free_map);

  Rewrite out;
  std::vector<chem::Atom> atoms;
  std::vector<std::optional<std::uint32_t>> new_index(mol.size());
  std::vector<bool> removed(mol.size(), false);
  for (std::uint32_t i = 0; i < mol.size(); ++i) {
    chem::Atom a = mol.atom(i);
    if (pattern_of[i]) {
      const PatternAtom &f = from.atom(*pattern_of[i]);
      auto t = to.find_map(f.map);
      if (!t) {
        removed[i] = true;
        continue;
      }
      const PatternAtom &target = to.atom(*t);
      a.element = target.element;
      a.charge = target.charge;
      a.aromatic = target.aromatic;
      if (target.center)
        a.hydrogens = target.hydrogens;
    }
    new_index[i] = static_cast<std::uint32_t>(atoms.size());
    atoms.push_back(std::move(a));
    out.origin.push_back(i);
  }
  std::vector<std::uint32_t> to_index(to.size());
  for (std::uint32_t t = 0; t < to.size(); ++t) {
    if (auto f = from.find_map(to.atom(t).map)) {
      to_index[t] = *new_index[embedding[*f]];
      continue;
    }
    const PatternAtom &p = to.atom(t);
    chem::Atom a;
    a.element = p.element;
    a.charge = p.charge;
    a.aromatic = p.aromatic;
    a.hydrogens = p.hydrogens;
    if (mapped)
      a.map = next_map++;
    to_index[t] = static_cast<std::uint32_t>(atoms.size());
    atoms.push_back(a);
    out.origin.push_back(std::nullopt);
  }

  std::vector<chem::Bond> bonds;
  for (const chem::Bond &b : mol.bonds()) {
    if (removed[b.begin] || removed[b.end]) {
      // A removed atom may only lose bonds that the pattern accounts for.
      if (!pattern_of[b.begin] || !pattern_of[b.end] ||
          !from.bond_between(*pattern_of[b.begin], *pattern_of[b.end]))
        return std::nullopt;
      continue;
    }
    if (pattern_of[b.begin] && pattern_of[b.end] &&
        from.bond_between(*pattern_of[b.begin], *pattern_of[b.end]))
      continue;
    bonds.push_back({*new_index[b.begin], *new_index[b.end], b.order, b.stereo});
  }
  for (const chem::Bond &b : to.bonds())
    bonds.push_back({to_index[b.begin], to_index[b.end], b.order, 0});
  try {
    out.molecule = Molecule(std::move(atoms), std::move(bonds));
  } catch (const Error &) {
    return std::nullopt;
  }
  return out;
}

struct RetroOutcome {
  std::vector<Molecule> reactants; // sorted by canonical SMILES
  std::string key;                 // sorted canonical SMILES, dot-joined
  Embedding embedding;
};

struct ApplyOptions {
  bool deduplicate = true;
  std::size_t max_embeddings = 10000;
  int first_free_map = 0; // lowest map number for created atoms (0: after the input's maximum)
};

/// Retro application: every embedding of the product pattern is rewritten
/// into a reactant set. Atom maps of the product are carried through.
inline std::vector<RetroOutcome> apply_template_retro(const ReactionTemplate &tpl,
                                                      const Molecule &product,
                                                      ApplyOptions opts = {}) {
  std::vector<RetroOutcome> out;
  std::set<std::string> seen;
  for (const Embedding &e : find_embeddings(tpl.product, product, opts.max_embeddings)) {
    auto r = rewrite(tpl.product, tpl.reactants, product, e, opts.first_free_map);
    if (!r)
      continue;
    std::vector<std::pair<std::string, Molecule>> parts;
    for (Molecule &m : r->molecule.split_components())
      parts.emplace_back(chem::canonical_smiles(m), std::move(m));
    std::sort(parts.begin(), parts.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    RetroOutcome o;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i)
        o.key += '.';
      o.key += parts[i].first;
      o.reactants.push_back(std::move(parts[i].second));
    }
    o.embedding = e;
    if (opts.deduplicate && !seen.insert(o.key).second)
      continue;
    out.push_back(std::move(o));
  }
  return out;
}

struct ForwardOutcome {
  Molecule product;
  std::string key;                    // canonical SMILES of the product
  std::vector<std::uint32_t> sources; // indices of reactants contributing atoms
  Embedding embedding;                // into the concatenated reactants
};

/// Forward application: the reactant pattern is matched across the
/// concatenated reactants and rewritten. The product is the connected
/// component holding the rewritten atoms; outcomes where they end up in
/// more than one component are discarded.
inline std::vector<ForwardOutcome> apply_template_forward(const ReactionTemplate &tpl,
                                                          const std::vector<Molecule> &reactants,
                                                          ApplyOptions opts = {}) {
  std::vector<ForwardOutcome> out;
  if (reactants.empty() || tpl.reactants.size() == 0)
    return out;
  const Molecule all = Molecule::combine(reactants);
  std::vector<std::uint32_t> source_of;
  for (std::uint32_t m = 0; m < reactants.size(); ++m)
    source_of.insert(source_of.end(), reactants[m].size(), m);
  std::set<std::string> seen;
  for (const Embedding &e : find_embeddings(tpl.reactants, all, opts.max_embeddings)) {
    auto r = rewrite(tpl.reactants, tpl.product, all, e, opts.first_free_map);
    if (!r)
      continue;
    std::vector<bool> touched(r->molecule.size(), false);
    std::set<std::uint32_t> matched(e.begin(), e.end());
    for (std::uint32_t i = 0; i < r->molecule.size(); ++i)
      touched[i] = !r->origin[i] || matched.count(*r->origin[i]);
    std::optional<std::size_t> component;
    bool split = false;
    const auto comps = r->molecule.components();
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (std::uint32_t i : comps[c])
        if (touched[i]) {
          if (component && *component != c)
            split = true;
          component = c;
        }
    if (!component || split)
      continue;
    ForwardOutcome o;
    o.product = r->molecule.subgraph(comps[*component]);
    o.key = chem::canonical_smiles(o.product);
    std::set<std::uint32_t> sources;
    for (std::uint32_t i : comps[*component])
      if (r->origin[i])
        sources.insert(source_of[*r->origin[i]]);
    o.sources.assign(sources.begin(), sources.end());
    o.embedding = e;
    if (opts.deduplicate && !seen.insert(o.key).second)
      continue;
    out.push_back(std::move(o));
  }
  return out;
}

} // namespace retrogate::reaction

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "retrogate/chem/canon.hpp"
#include "retrogate/chem/smiles.hpp"
#include "retrogate/reaction/center.hpp"

namespace retrogate::retrieval {

using reaction::AtomRef;
using reaction::Reaction;
using reaction::Side;

/// Key shared by every reaction whose center is empty. Such reactions are
/// indexed separately and never count as precedents.
inline const std::string kNoOpKey = "<no-op>";

/// Atoms that are endpoints of a conjugated double bond: a non-aromatic
/// double bond with a single bond from one of its ends to an atom that
/// carries another double bond or is aromatic.
inline std::vector<bool> conjugated_atoms(const chem::Molecule &mol) {
  std::vector<bool> has_double(mol.size(), false);
  for (const chem::Bond &b : mol.bonds())
    if (b.order == chem::BondOrder::Double)
      has_double[b.begin] = has_double[b.end] = true;
  std::vector<bool> out(mol.size(), false);
  for (std::uint32_t k = 0; k < mol.bonds().size(); ++k) {
    const chem::Bond &b = mol.bond(k);
    if (b.order != chem::BondOrder::Double)
      continue;
    bool conjugated = false;
    for (std::uint32_t end : {b.begin, b.end})
      for (const chem::Neighbor &nb : mol.neighbors(end)) {
        if (nb.bond == k || mol.bond(nb.bond).order != chem::BondOrder::Single)
          continue;
        if (mol.atom(nb.atom).aromatic || has_double[nb.atom])
          conjugated = true;
      }
    if (conjugated)
      out[b.begin] = out[b.end] = true;
  }
  return out;
}

struct PatternKeys {
  std::string coarse;
  std::string fine;
};

namespace detail {

struct SideAtom {
  std::uint8_t element = 0;
  int charge = 0;
  bool aromatic = false;
  bool conjugated = false;
};

// Center atoms paired by map number, with bond orders on each side
// (0 = no bond on that side).
struct CenterGraph {
  std::vector<std::optional<SideAtom>> reactant, product;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<int, int>> edges;

  std::size_t size() const { return reactant.size(); }
};

inline CenterGraph center_graph(const Reaction &rxn) {
  const std::vector<AtomRef> center = reaction::reaction_center(rxn);
  const reaction::MapIndex index(rxn);
  // Reactant molecules that contribute nothing to the product are reagents.
  std::vector<bool> contributes(rxn.reactants.size(), false);
  for (const auto &[map, ref] : index.reactant_maps())
    if (index.product(map))
      contributes[ref.mol] = true;

  CenterGraph g;
  std::map<AtomRef, std::uint32_t> node_of;
  std::map<int, std::uint32_t> node_of_map;
  std::vector<std::vector<bool>> conj_r;
  for (const chem::Molecule &m : rxn.reactants)
    conj_r.push_back(conjugated_atoms(m));
  const std::vector<bool> conj_p = conjugated_atoms(rxn.product);

  for (const AtomRef &ref : center) {
    if (ref.side == Side::Reactant && !contributes[ref.mol])
      continue;
    const chem::Atom &a = index.atom(ref);
    std::uint32_t n;
    if (a.map && node_of_map.count(*a.map)) {
      n = node_of_map[*a.map];
    } else {
      n = static_cast<std::uint32_t>(g.size());
      g.reactant.emplace_back();
      g.product.emplace_back();
      if (a.map)
        node_of_map[*a.map] = n;
    }
    node_of[ref] = n;
    const bool conjugated =
        ref.side == Side::Product ? conj_p[ref.atom] : conj_r[ref.mol][ref.atom];
    (ref.side == Side::Product ? g.product : g.reactant)[n] =
        SideAtom{a.element, a.charge, a.aromatic, conjugated};
  }
  for (const auto &[ref, n] : node_of)
    for (const chem::Neighbor &nb : index.molecule(ref).neighbors(ref.atom)) {
      auto other = node_of.find(AtomRef{ref.side, ref.mol, nb.atom});
      if (other == node_of.end() || other->second == n)
        continue;
      auto &orders = g.edges[{std::min(n, other->second), std::max(n, other->second)}];
      const int order = static_cast<int>(index.molecule(ref).bond(nb.bond).order);
      (ref.side == Side::Product ? orders.second : orders.first) = order;
    }
  return g;
}

inline std::uint64_t side_label(const std::optional<SideAtom> &a, bool flags) {
  if (!a)
    return 0x5a;
  std::uint64_t h = hash_combine(a->element, static_cast<std::uint64_t>(a->charge + 16));
  if (flags)
    h = hash_combine(hash_combine(h, a->aromatic), a->conjugated);
  return h;
}

inline std::string side_token(const SideAtom &a, bool flags, std::uint32_t rank) {
  std::string t = "[" + std::string(chem::element(a.element).symbol);
  if (a.charge != 0) {
    t += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      t += std::to_string(std::abs(a.charge));
  }
  if (flags)
    t += std::string(";") + (a.aromatic ? 'a' : '-') + (a.conjugated ? 'c' : '-');
  return t + ":" + std::to_string(rank + 1) + "]";
}

inline const char *order_token(int order) {
  switch (order) {
  case 1: return "-";
  case 2: return "=";
  case 3: return "#";
  default: return ":";
  }
}

// Canonical text of one connected component of the center graph.
inline std::string component_text(const CenterGraph &g, const std::vector<std::uint32_t> &nodes,
                                  bool flags) {
  std::map<std::uint32_t, std::uint32_t> local;
  for (std::uint32_t i = 0; i < nodes.size(); ++i)
    local[nodes[i]] = i;
  chem::LabeledGraph lg(nodes.size());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const std::uint64_t h = hash_combine(side_label(g.reactant[nodes[i]], flags),
                                         side_label(g.product[nodes[i]], flags));
    lg.node_labels[i] = lg.node_identity[i] = h;
  }
  for (const auto &[pair, orders] : g.edges) {
    auto a = local.find(pair.first), b = local.find(pair.second);
    if (a != local.end() && b != local.end())
      lg.add_edge(a->second, b->second, static_cast<std::uint64_t>(orders.first * 8 + orders.second));
  }

  auto render_side = [&](bool product, const std::vector<std::uint32_t> &ranks) {
    const auto &atoms = product ? g.product : g.reactant;
    std::vector<std::uint32_t> members; // local indices present on this side
    std::vector<std::uint32_t> pos(nodes.size(), 0);
    for (std::uint32_t i = 0; i < nodes.size(); ++i)
      if (atoms[nodes[i]]) {
        pos[i] = static_cast<std::uint32_t>(members.size());
        members.push_back(i);
      }
    std::vector<std::string> tokens, bond_tokens;
    std::vector<std::uint32_t> priority;
    std::vector<std::vector<chem::Neighbor>> adjacency(members.size());
    for (std::uint32_t i : members) {
      tokens.push_back(side_token(*atoms[nodes[i]], flags, ranks[i]));
      priority.push_back(ranks[i]);
    }
    for (const auto &[pair, orders] : g.edges) {
      const int order = product ? orders.second : orders.first;
      auto a = local.find(pair.first), b = local.find(pair.second);
      if (order == 0 || a == local.end() || b == local.end())
        continue;
      const auto k = static_cast<std::uint32_t>(bond_tokens.size());
      bond_tokens.emplace_back(order_token(order));
      adjacency[pos[a->second]].push_back({pos[b->second], k});
      adjacency[pos[b->second]].push_back({pos[a->second], k});
    }
    return chem::layout_smiles(
               members.size(),
               [&](std::uint32_t v) { return std::span<const chem::Neighbor>(adjacency[v]); },
               tokens, bond_tokens, priority)
        .text;
  };
  auto render = [&](const std::vector<std::uint32_t> &ranks) {
    return render_side(false, ranks) + ">>" + render_side(true, ranks);
  };
  std::string text;
  chem::canonical_ranking(lg, render, &text);
  return text;
}

inline std::vector<std::vector<std::uint32_t>> components(const CenterGraph &g) {
  std::vector<std::uint32_t> parent(g.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto &[pair, orders] : g.edges)
    parent[find(pair.first)] = find(pair.second);
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < g.size(); ++i)
    groups[find(i)].push_back(i);
  std::vector<std::vector<std::uint32_t>> out;
  for (auto &[root, members] : groups)
    out.push_back(std::move(members));
  return out;
}

inline std::string join_sorted(std::vector<std::string> parts) {
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i)
    out += (i ? ";" : "") + parts[i];
  return out;
}

} // namespace detail

/// Coarse and fine transformation keys. The coarse key describes the
/// reaction center as paired reactant/product graphs (elements, charges,
/// bond changes) split into connected components, each canonicalised and
/// sorted. The fine key appends the same rendering with aromatic and
/// conjugation flags on every center atom, so equal fine keys imply equal
/// coarse keys. Throws NoMappedAtoms for an unmapped product.
inline PatternKeys pattern_keys(const Reaction &rxn) {
  const detail::CenterGraph g = detail::center_graph(rxn);
  if (g.size() == 0)
    return {kNoOpKey, kNoOpKey};
  std::vector<std::string> coarse, fine;
  for (const auto &comp : detail::components(g)) {
    coarse.push_back(detail::component_text(g, comp, false));
    fine.push_back(detail::component_text(g, comp, true));
  }
  PatternKeys keys;
  keys.coarse = detail::join_sorted(std::move(coarse));
  keys.fine = keys.coarse + "|" + detail::join_sorted(std::move(fine));
  return keys;
}

inline std::string coarse_key(const Reaction &rxn) { return pattern_keys(rxn).coarse; }
inline std::string fine_key(const Reaction &rxn) { return pattern_keys(rxn).fine; }

} // namespace retrogate::retrieval

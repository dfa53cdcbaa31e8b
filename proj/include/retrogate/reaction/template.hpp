#pragma once

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "retrogate/chem/canon.hpp"
#include "retrogate/chem/smiles.hpp"
#include "retrogate/reaction/center.hpp"

namespace retrogate::reaction {

/// Template atom. Center atoms constrain hydrogen count and degree exactly;
/// other atoms are attachment points that accept any further substituents.
struct PatternAtom {
  std::uint8_t element = 6;
  int charge = 0;
  bool aromatic = false;
  int map = 0;
  bool center = false;
  int hydrogens = 0;
  int degree = 0;

  friend bool operator==(const PatternAtom &, const PatternAtom &) = default;
};

/// One side of a template: a small labelled graph, possibly disconnected.
class PatternGraph {
public:
  PatternGraph() = default;
  PatternGraph(std::vector<PatternAtom> atoms, std::vector<chem::Bond> bonds)
      : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size()) {
    for (std::uint32_t b = 0; b < bonds_.size(); ++b) {
      adjacency_[bonds_[b].begin].push_back({bonds_[b].end, b});
      adjacency_[bonds_[b].end].push_back({bonds_[b].begin, b});
    }
  }

  std::size_t size() const noexcept { return atoms_.size(); }
  const std::vector<PatternAtom> &atoms() const noexcept { return atoms_; }
  const std::vector<chem::Bond> &bonds() const noexcept { return bonds_; }
  const PatternAtom &atom(std::uint32_t i) const { return atoms_[i]; }
  const chem::Bond &bond(std::uint32_t b) const { return bonds_[b]; }
  std::span<const chem::Neighbor> neighbors(std::uint32_t i) const { return adjacency_[i]; }

  std::optional<std::uint32_t> find_map(int map) const {
    for (std::uint32_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i].map == map)
        return i;
    return std::nullopt;
  }

  std::optional<std::uint32_t> bond_between(std::uint32_t a, std::uint32_t b) const {
    for (const chem::Neighbor &nb : adjacency_[a])
      if (nb.atom == b)
        return nb.bond;
    return std::nullopt;
  }

private:
  std::vector<PatternAtom> atoms_;
  std::vector<chem::Bond> bonds_;
  std::vector<std::vector<chem::Neighbor>> adjacency_;
};

/// Local rewrite rule written in the retro direction: the product pattern
/// is replaced by the reactant pattern. Atoms with equal map numbers
/// correspond; map numbers present on one side only are created or removed.
struct ReactionTemplate {
  PatternGraph product;
  PatternGraph reactants;
  int radius = 1;
  int popularity = 1;
  std::string text;
};

// ---------------------------------------------------------------------------
// Text form: "product>>reactants", every atom bracketed with its map number.
// Center atoms carry H and ";D<degree>", e.g. [CH0;D3:2]. All bonds are
// written explicitly.
// ---------------------------------------------------------------------------

inline std::string pattern_atom_token(const PatternAtom &a, int map) {
  std::string sym(chem::element(a.element).symbol);
  if (a.aromatic)
    sym[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(sym[0])));
  std::string t = "[" + sym;
  if (a.center)
    t += "H" + std::to_string(a.hydrogens);
  if (a.charge != 0) {
    t += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      t += std::to_string(std::abs(a.charge));
  }
  if (a.center)
    t += ";D" + std::to_string(a.degree);
  t += ":" + std::to_string(map) + "]";
  return t;
}

inline std::string pattern_bond_token(chem::BondOrder order) {
  switch (order) {
  case chem::BondOrder::Single: return "-";
  case chem::BondOrder::Double: return "=";
  case chem::BondOrder::Triple: return "#";
  case chem::BondOrder::Aromatic: return ":";
  }
  return "-";
}

/// Writes one side with the given map numbers, atoms laid out by priority.
inline std::string write_pattern(const PatternGraph &g, std::span<const int> maps,
                                 std::span<const std::uint32_t> priority) {
  std::vector<std::string> atoms(g.size());
  for (std::uint32_t i = 0; i < g.size(); ++i)
    atoms[i] = pattern_atom_token(g.atom(i), maps[i]);
  std::vector<std::string> bonds(g.bonds().size());
  for (std::uint32_t b = 0; b < bonds.size(); ++b)
    bonds[b] = pattern_bond_token(g.bond(b).order);
  return chem::layout_smiles(
             g.size(), [&](std::uint32_t a) { return g.neighbors(a); }, atoms, bonds, priority)
      .text;
}

inline std::string template_text(const PatternGraph &product, const PatternGraph &reactants) {
  auto side = [](const PatternGraph &g) {
    std::vector<int> maps;
    std::vector<std::uint32_t> priority;
    for (std::uint32_t i = 0; i < g.size(); ++i) {
      maps.push_back(g.atom(i).map);
      priority.push_back(static_cast<std::uint32_t>(g.atom(i).map));
    }
    return write_pattern(g, maps, priority);
  };
  return side(product) + ">>" + side(reactants);
}

namespace detail {

inline PatternGraph parse_pattern(std::string_view text, std::size_t base_offset) {
  // Strip ";D<n>" annotations, remembering them per bracket atom.
  std::string plain;
  std::vector<std::optional<int>> degrees;
  std::vector<std::size_t> offset_map;
  bool in_bracket = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '[') {
      in_bracket = true;
      degrees.emplace_back();
    } else if (c == ']') {
      in_bracket = false;
    } else if (c == ';' && in_bracket) {
      if (i + 1 >= text.size() || text[i + 1] != 'D')
        throw Error(ErrorCode::ParseError, "expected 'D' after ';'", base_offset + i);
      std::size_t j = i + 2;
      int d = 0;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
        d = d * 10 + (text[j++] - '0');
      if (j == i + 2)
        throw Error(ErrorCode::ParseError, "degree expected", base_offset + j);
      degrees.back() = d;
      i = j - 1;
      continue;
    }
    plain += c;
    offset_map.push_back(i);
  }
  chem::ParsedGraph parsed;
  try {
    parsed = chem::parse_graph(plain);
  } catch (const Error &e) {
    std::optional<std::size_t> at;
    if (e.offset())
      at = base_offset + (*e.offset() < offset_map.size() ? offset_map[*e.offset()] : text.size());
    throw Error(e.code(), e.detail(), at);
  }
  if (parsed.atoms.size() != degrees.size())
    throw Error(ErrorCode::ParseError, "template atoms must all be bracket atoms", base_offset);
  std::vector<PatternAtom> atoms;
  for (std::size_t i = 0; i < parsed.atoms.size(); ++i) {
    const chem::ParsedAtom &p = parsed.atoms[i];
    const std::size_t at = base_offset + offset_map[p.offset];
    if (!p.atom.map)
      throw Error(ErrorCode::ParseError, "template atom without map number", at);
    if (p.hydrogens_given != degrees[i].has_value())
      throw Error(ErrorCode::ParseError, "center atoms need both H and D, others neither", at);
    PatternAtom a;
    a.element = p.atom.element;
    a.charge = p.atom.charge;
    a.aromatic = p.atom.aromatic;
    a.map = *p.atom.map;
    a.center = p.hydrogens_given;
    a.hydrogens = p.atom.hydrogens;
    a.degree = degrees[i].value_or(0);
    for (const PatternAtom &prev : atoms)
      if (prev.map == a.map)
        throw Error(ErrorCode::DuplicateMapNumber, "map number repeated within a template side", at);
    atoms.push_back(a);
  }
  return PatternGraph(std::move(atoms), std::move(parsed.bonds));
}

} // namespace detail

inline ReactionTemplate parse_template(std::string_view text, int radius = 1, int popularity = 1) {
  const auto arrow = text.find(">>");
  if (arrow == std::string_view::npos)
    throw Error(ErrorCode::ParseError, "template must contain '>>'");
  ReactionTemplate t;
  t.product = detail::parse_pattern(text.substr(0, arrow), 0);
  t.reactants = detail::parse_pattern(text.substr(arrow + 2), arrow + 2);
  for (const PatternAtom &p : t.product.atoms())
    if (auto r = t.reactants.find_map(p.map))
      if (t.reactants.atom(*r).center != p.center)
        throw Error(ErrorCode::ParseError, "center flag differs across sides for map " +
                                               std::to_string(p.map));
  t.radius = radius;
  t.popularity = popularity;
  t.text = std::string(text);
  return t;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

namespace detail {

struct TemplateNode {
  std::optional<AtomRef> reactant;
  std::optional<AtomRef> product;
  bool center = false;
};

inline PatternAtom pattern_atom(const Molecule &mol, std::uint32_t i, bool center) {
  const chem::Atom &a = mol.atom(i);
  PatternAtom p;
  p.element = a.element;
  p.charge = a.charge;
  p.aromatic = a.aromatic;
  p.center = center;
  if (center) {
    p.hydrogens = a.hydrogens;
    p.degree = static_cast<int>(mol.degree(i));
  }
  return p;
}

inline std::uint64_t pattern_atom_label(const PatternAtom &a) {
  std::uint64_t h = hash_combine(a.element, static_cast<std::uint64_t>(a.charge + 16));
  h = hash_combine(h, a.aromatic ? 1 : 0);
  h = hash_combine(h, a.center ? 1 : 0);
  h = hash_combine(h, static_cast<std::uint64_t>(a.hydrogens));
  return hash_combine(h, static_cast<std::uint64_t>(a.degree));
}

} // namespace detail

/// Extracts the radius-r template of a mapped reaction. The center is
/// grown by `radius` bonds on each side, and atoms selected on one side pull
/// in their mapped partners. Unmapped reactant atoms and reactant molecules
/// that contribute no atom to the product are left out. The result is
/// canonical: equal chemistry gives equal text.
inline ReactionTemplate extract_template(const Reaction &rxn, int radius = 1) {
  if (radius < 0)
    throw Error(ErrorCode::InvalidParams, "template radius must be non-negative");
  const std::vector<AtomRef> center = reaction_center(rxn);
  const MapIndex index(rxn);
  std::vector<bool> contributes(rxn.reactants.size(), false);
  for (const auto &[map, ref] : index.reactant_maps())
    if (index.product(map))
      contributes[ref.mol] = true;

  auto in_scope = [&](const AtomRef &ref) {
    if (ref.side == Side::Product)
      return true;
    return contributes[ref.mol] && index.atom(ref).map.has_value();
  };

  std::set<AtomRef> center_set;
  for (const AtomRef &ref : center)
    if (in_scope(ref))
      center_set.insert(ref);
  if (center_set.empty())
    throw Error(ErrorCode::NoMappedAtoms, "reaction center is empty");

  // Breadth-first growth on each side.
  std::set<AtomRef> selected = center_set;
  std::deque<std::pair<AtomRef, int>> queue;
  for (const AtomRef &ref : center_set)
    queue.emplace_back(ref, 0);
  while (!queue.empty()) {
    auto [ref, dist] = queue.front();
    queue.pop_front();
    if (dist == radius)
      continue;
    for (const chem::Neighbor &nb : index.molecule(ref).neighbors(ref.atom)) {
      AtomRef next{ref.side, ref.mol, nb.atom};
      if (in_scope(next) && selected.insert(next).second)
        queue.emplace_back(next, dist + 1);
    }
  }
  std::vector<AtomRef> partners;
  for (const AtomRef &ref : selected)
    if (auto p = index.partner(ref); p && in_scope(*p))
      partners.push_back(*p);
  selected.insert(partners.begin(), partners.end());

  // One node per mapped atom pair or unpaired atom.
  std::vector<detail::TemplateNode> nodes;
  std::map<int, std::size_t> node_of_map;
  for (const AtomRef &ref : selected) {
    const auto map = index.atom(ref).map;
    std::size_t n;
    if (map && node_of_map.count(*map)) {
      n = node_of_map[*map];
    } else {
      n = nodes.size();
      nodes.emplace_back();
      if (map)
        node_of_map[*map] = n;
    }
    (ref.side == Side::Product ? nodes[n].product : nodes[n].reactant) = ref;
    nodes[n].center = nodes[n].center || center_set.count(ref);
  }

  // Side graphs with a node index per atom.
  auto build_side = [&](Side side, std::vector<std::uint32_t> &node_of_atom) {
    std::vector<PatternAtom> atoms;
    std::map<AtomRef, std::uint32_t> local;
    for (std::uint32_t n = 0; n < nodes.size(); ++n) {
      const auto &ref = side == Side::Product ? nodes[n].product : nodes[n].reactant;
      if (!ref)
        continue;
      local[*ref] = static_cast<std::uint32_t>(atoms.size());
      atoms.push_back(detail::pattern_atom(index.molecule(*ref), ref->atom, nodes[n].center));
      node_of_atom.push_back(n);
    }
    std::vector<chem::Bond> bonds;
    for (const auto &[ref, i] : local)
      for (const chem::Neighbor &nb : index.molecule(ref).neighbors(ref.atom)) {
        auto other = local.find(AtomRef{ref.side, ref.mol, nb.atom});
        if (other != local.end() && i < other->second)
          bonds.push_back({i, other->second, index.molecule(ref).bond(nb.bond).order, 0});
      }
    return PatternGraph(std::move(atoms), std::move(bonds));
  };
  std::vector<std::uint32_t> p_node, r_node;
  PatternGraph product = build_side(Side::Product, p_node);
  PatternGraph reactants = build_side(Side::Reactant, r_node);
  if (product.size() == 0)
    throw Error(ErrorCode::NoMappedAtoms, "template has an empty product side");

  // Canonical numbering over the union of both sides.
  chem::LabeledGraph g(nodes.size());
  std::vector<std::optional<std::uint32_t>> p_of(nodes.size()), r_of(nodes.size());
  for (std::uint32_t i = 0; i < product.size(); ++i)
    p_of[p_node[i]] = i;
  for (std::uint32_t i = 0; i < reactants.size(); ++i)
    r_of[r_node[i]] = i;
  for (std::uint32_t n = 0; n < nodes.size(); ++n) {
    std::uint64_t h = p_of[n] ? detail::pattern_atom_label(product.atom(*p_of[n])) : 0x70;
    h = hash_combine(h, r_of[n] ? detail::pattern_atom_label(reactants.atom(*r_of[n])) : 0x72);
    g.node_labels[n] = h;
    g.node_identity[n] = h;
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> edges;
  for (const chem::Bond &b : product.bonds()) {
    const std::uint32_t x = p_node[b.begin], y = p_node[b.end];
    edges[{std::min(x, y), std::max(x, y)}] += static_cast<std::uint64_t>(b.order) * 8;
  }
  for (const chem::Bond &b : reactants.bonds()) {
    const std::uint32_t x = r_node[b.begin], y = r_node[b.end];
    edges[{std::min(x, y), std::max(x, y)}] += static_cast<std::uint64_t>(b.order);
  }
  for (const auto &[key, label] : edges)
    g.add_edge(key.first, key.second, label);

  auto render = [&](const std::vector<std::uint32_t> &ranks) {
    auto side = [&](const PatternGraph &pg, const std::vector<std::uint32_t> &node_of) {
      std::vector<int> maps(pg.size());
      std::vector<std::uint32_t> priority(pg.size());
      for (std::uint32_t i = 0; i < pg.size(); ++i) {
        priority[i] = ranks[node_of[i]];
        maps[i] = static_cast<int>(priority[i]) + 1;
      }
      return write_pattern(pg, maps, priority);
    };
    return side(product, p_node) + ">>" + side(reactants, r_node);
  };
  std::string text;
  chem::canonical_ranking(g, render, &text);
  return parse_template(text, radius, 1);
}

} // namespace retrogate::reaction

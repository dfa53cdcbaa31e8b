#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "retrogate/reaction/reaction.hpp"

namespace retrogate::reaction {

enum class Side : std::uint8_t { Reactant = 0, Product = 1 };

/// An atom of a reaction. For the product side `mol` is always 0.
struct AtomRef {
  Side side = Side::Reactant;
  std::uint32_t mol = 0;
  std::uint32_t atom = 0;

  friend auto operator<=>(const AtomRef &, const AtomRef &) = default;
};

/// Map-number lookup over both sides of a reaction.
class MapIndex {
public:
  explicit MapIndex(const Reaction &rxn) : rxn_(&rxn) {
    for (std::uint32_t m = 0; m < rxn.reactants.size(); ++m)
      for (std::uint32_t i = 0; i < rxn.reactants[m].size(); ++i)
        if (auto map = rxn.reactants[m].atom(i).map)
          reactant_[*map] = {Side::Reactant, m, i};
    for (std::uint32_t i = 0; i < rxn.product.size(); ++i)
      if (auto map = rxn.product.atom(i).map)
        product_[*map] = {Side::Product, 0, i};
  }

  std::optional<AtomRef> reactant(int map) const { return find(reactant_, map); }
  std::optional<AtomRef> product(int map) const { return find(product_, map); }

  /// Counterpart of a mapped atom on the other side.
  std::optional<AtomRef> partner(const AtomRef &ref) const {
    const auto &a = atom(ref);
    if (!a.map)
      return std::nullopt;
    return ref.side == Side::Reactant ? product(*a.map) : reactant(*a.map);
  }

  const chem::Atom &atom(const AtomRef &ref) const { return molecule(ref).atom(ref.atom); }
  const Molecule &molecule(const AtomRef &ref) const {
    return ref.side == Side::Product ? rxn_->product : rxn_->reactants[ref.mol];
  }

  const std::map<int, AtomRef> &reactant_maps() const noexcept { return reactant_; }
  const std::map<int, AtomRef> &product_maps() const noexcept { return product_; }

private:
  static std::optional<AtomRef> find(const std::map<int, AtomRef> &m, int map) {
    auto it = m.find(map);
    if (it == m.end())
      return std::nullopt;
    return it->second;
  }

  const Reaction *rxn_;
  std::map<int, AtomRef> reactant_;
  std::map<int, AtomRef> product_;
};

namespace detail {

// (neighbour map, bond order) pairs over the mapped neighbours of an atom.
inline std::vector<std::pair<int, chem::BondOrder>> mapped_environment(const Molecule &mol,
                                                                       std::uint32_t atom) {
  std::vector<std::pair<int, chem::BondOrder>> env;
  for (const chem::Neighbor &nb : mol.neighbors(atom))
    if (auto map = mol.atom(nb.atom).map)
      env.emplace_back(*map, mol.bond(nb.bond).order);
  std::sort(env.begin(), env.end());
  return env;
}

} // namespace detail

/// Atoms whose bonding changed between the sides, sorted. An atom mapped on
/// both sides is in the center when its charge, hydrogen count or aromatic
/// flag changed, or when a bond to a mapped neighbour formed, broke or
/// changed order. Mapped atoms without a counterpart and unmapped product
/// atoms are always in the center. Unmapped reactant atoms are spectators
/// and never are.
inline std::vector<AtomRef> reaction_center(const Reaction &rxn) {
  if (!rxn.product.has_maps())
    throw Error(ErrorCode::NoMappedAtoms, "reaction has no mapped product atoms");
  const MapIndex index(rxn);
  std::vector<AtomRef> center;
  for (std::uint32_t m = 0; m < rxn.reactants.size(); ++m) {
    const Molecule &mol = rxn.reactants[m];
    for (std::uint32_t i = 0; i < mol.size(); ++i) {
      const chem::Atom &a = mol.atom(i);
      if (!a.map)
        continue;
      const auto partner = index.product(*a.map);
      if (!partner) {
        center.push_back({Side::Reactant, m, i});
        continue;
      }
      const chem::Atom &b = rxn.product.atom(partner->atom);
      if (a.charge != b.charge || a.hydrogens != b.hydrogens || a.aromatic != b.aromatic ||
          detail::mapped_environment(mol, i) != detail::mapped_environment(rxn.product, partner->atom)) {
        center.push_back({Side::Reactant, m, i});
        center.push_back(*partner);
      }
    }
  }
  for (std::uint32_t i = 0; i < rxn.product.size(); ++i) {
    const chem::Atom &a = rxn.product.atom(i);
    if (!a.map || !index.reactant(*a.map))
      center.push_back({Side::Product, 0, i});
  }
  std::sort(center.begin(), center.end());
  center.erase(std::unique(center.begin(), center.end()), center.end());
  return center;
}

/// Map numbers of the center atoms (atoms without a map are skipped).
inline std::vector<int> center_maps(const Reaction &rxn, const std::vector<AtomRef> &center) {
  const MapIndex index(rxn);
  std::vector<int> maps;
  for (const AtomRef &ref : center)
    if (auto map = index.atom(ref).map)
      maps.push_back(*map);
  std::sort(maps.begin(), maps.end());
  maps.erase(std::unique(maps.begin(), maps.end()), maps.end());
  return maps;
}

} // namespace retrogate::reaction

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "retrogate/chem/element.hpp"
#include "retrogate/error.hpp"

namespace retrogate::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

/// Contribution of a bond to an atom's valence. Aromatic bonds count as one;
/// the extra pi electron is accounted for in implicit-hydrogen rules only.
constexpr int valence_contribution(BondOrder order) noexcept {
  return order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  std::uint8_t element = 6;
  int charge = 0;
  int hydrogens = 0; // total attached H, implicit ones resolved at parse time
  bool aromatic = false;
  std::optional<int> isotope;
  std::optional<int> map;
  // Chirality token as written ("@", "@@", ...). Carried through round-trips
  // but never interpreted.
  std::string stereo;

  friend bool operator==(const Atom &, const Atom &) = default;
};

struct Bond {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  BondOrder order = BondOrder::Single;
  char stereo = 0; // '/' or '\\' as written; opaque

  std::uint32_t other(std::uint32_t atom) const noexcept { return atom == begin ? end : begin; }
  friend bool operator==(const Bond &, const Bond &) = default;
};

struct Neighbor {
  std::uint32_t atom;
  std::uint32_t bond;
};

/// Implicit hydrogen count for an organic-subset atom written without
/// brackets. `bond_sum` uses valence_contribution for each bond.
inline int implicit_hydrogens(const ElementInfo &e, int bond_sum, bool aromatic) {
  if (e.n_default_valences == 0)
    return 0;
  if (aromatic) {
    // Aromatic atoms spend one valence on the delocalised system.
    return std::max(0, e.default_valences[0] - bond_sum - 1);
  }
  for (std::uint8_t v : e.valences())
    if (v >= bond_sum)
      return v - bond_sum;
  return 0;
}

/// Immutable molecular graph. Construction validates every invariant:
/// simple graph, valid endpoints, unique map numbers and valence limits.
class Molecule {
public:
  Molecule() = default;

  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds)
      : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
    adjacency_.assign(atoms_.size(), {});
    for (std::uint32_t b = 0; b < bonds_.size(); ++b) {
      const Bond &bond = bonds_[b];
      if (bond.begin >= atoms_.size() || bond.end >= atoms_.size())
        throw Error(ErrorCode::InvalidBond, "bond endpoint out of range");
      if (bond.begin == bond.end)
        throw Error(ErrorCode::InvalidBond, "self-loop on atom " + std::to_string(bond.begin));
      for (const Neighbor &nb : adjacency_[bond.begin])
        if (nb.atom == bond.end)
          throw Error(ErrorCode::InvalidBond, "duplicate bond between atoms " +
                                                  std::to_string(bond.begin) + " and " +
                                                  std::to_string(bond.end));
      adjacency_[bond.begin].push_back({bond.end, b});
      adjacency_[bond.end].push_back({bond.begin, b});
    }
    std::unordered_set<int> maps;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom &a = atoms_[i];
      if (!known_element(a.element))
        throw Error(ErrorCode::UnknownElement, "atomic number " + std::to_string(a.element));
      if (a.hydrogens < 0)
        throw Error(ErrorCode::ValenceExceeded, "negative hydrogen count on atom " +
                                                    std::to_string(i));
      if (a.map) {
        if (*a.map <= 0)
          throw Error(ErrorCode::DuplicateMapNumber, "map numbers must be positive");
        if (!maps.insert(*a.map).second)
          throw Error(ErrorCode::DuplicateMapNumber, "map number " + std::to_string(*a.map) +
                                                         " used twice");
      }
      const int limit = max_valence(element(a.element), a.charge);
      if (valence(static_cast<std::uint32_t>(i)) > limit)
        throw Error(ErrorCode::ValenceExceeded,
                    std::string(element(a.element).symbol) + " atom " + std::to_string(i) +
                        " has valence " + std::to_string(valence(static_cast<std::uint32_t>(i))) +
                        " > " + std::to_string(limit));
    }
  }

  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  const std::vector<Bond> &bonds() const noexcept { return bonds_; }
  const Atom &atom(std::uint32_t i) const { return atoms_[i]; }
  const Bond &bond(std::uint32_t i) const { return bonds_[i]; }
  std::span<const Neighbor> neighbors(std::uint32_t i) const { return adjacency_[i]; }
  std::size_t degree(std::uint32_t i) const { return adjacency_[i].size(); }

  std::optional<std::uint32_t> bond_between(std::uint32_t a, std::uint32_t b) const {
    for (const Neighbor &nb : adjacency_[a])
      if (nb.atom == b)
        return nb.bond;
    return std::nullopt;
  }

  int bond_sum(std::uint32_t i) const {
    int sum = 0;
    for (const Neighbor &nb : adjacency_[i])
      sum += valence_contribution(bonds_[nb.bond].order);
    return sum;
  }

  int valence(std::uint32_t i) const { return bond_sum(i) + atoms_[i].hydrogens; }

  std::optional<std::uint32_t> find_map(int map) const {
    for (std::uint32_t i = 0; i < atoms_.size(); ++i)
      if (atoms_[i].map == map)
        return i;
    return std::nullopt;
  }

  bool has_maps() const {
    return std::any_of(atoms_.begin(), atoms_.end(), [](const Atom &a) { return a.map.has_value(); });
  }

  /// Connected components as sorted atom index lists, ordered by first atom.
  std::vector<std::vector<std::uint32_t>> components() const {
    std::vector<int> comp(atoms_.size(), -1);
    std::vector<std::vector<std::uint32_t>> out;
    for (std::uint32_t s = 0; s < atoms_.size(); ++s) {
      if (comp[s] >= 0)
        continue;
      const int id = static_cast<int>(out.size());
      out.emplace_back();
      std::vector<std::uint32_t> stack{s};
      comp[s] = id;
      while (!stack.empty()) {
        std::uint32_t a = stack.back();
        stack.pop_back();
        out.back().push_back(a);
        for (const Neighbor &nb : adjacency_[a])
          if (comp[nb.atom] < 0) {
            comp[nb.atom] = id;
            stack.push_back(nb.atom);
          }
      }
      std::sort(out.back().begin(), out.back().end());
    }
    return out;
  }

  /// Induced subgraph on `keep`, atoms in the given order.
  Molecule subgraph(std::span<const std::uint32_t> keep) const {
    std::vector<std::int64_t> index(atoms_.size(), -1);
    std::vector<Atom> atoms;
    atoms.reserve(keep.size());
    for (std::uint32_t a : keep) {
      index[a] = static_cast<std::int64_t>(atoms.size());
      atoms.push_back(atoms_[a]);
    }
    std::vector<Bond> bonds;
    for (const Bond &b : bonds_)
      if (index[b.begin] >= 0 && index[b.end] >= 0)
        bonds.push_back({static_cast<std::uint32_t>(index[b.begin]),
                         static_cast<std::uint32_t>(index[b.end]), b.order, b.stereo});
    return Molecule(std::move(atoms), std::move(bonds));
  }

  std::vector<Molecule> split_components() const {
    std::vector<Molecule> out;
    for (const auto &c : components())
      out.push_back(subgraph(c));
    return out;
  }

  /// Renumbers atoms: atom i of this molecule becomes atom perm[i].
  Molecule permuted(std::span<const std::uint32_t> perm) const {
    std::vector<Atom> atoms(atoms_.size());
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      atoms[perm[i]] = atoms_[i];
    std::vector<Bond> bonds;
    bonds.reserve(bonds_.size());
    for (const Bond &b : bonds_)
      bonds.push_back({perm[b.begin], perm[b.end], b.order, b.stereo});
    return Molecule(std::move(atoms), std::move(bonds));
  }

  Molecule without_maps() const {
    std::vector<Atom> atoms = atoms_;
    for (Atom &a : atoms)
      a.map.reset();
    return Molecule(std::move(atoms), bonds_);
  }

  static Molecule combine(std::span<const Molecule> parts) {
    std::vector<Atom> atoms;
    std::vector<Bond> bonds;
    for (const Molecule &m : parts) {
      const auto offset = static_cast<std::uint32_t>(atoms.size());
      atoms.insert(atoms.end(), m.atoms_.begin(), m.atoms_.end());
      for (const Bond &b : m.bonds_)
        bonds.push_back({b.begin + offset, b.end + offset, b.order, b.stereo});
    }
    return Molecule(std::move(atoms), std::move(bonds));
  }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

} // namespace retrogate::chem

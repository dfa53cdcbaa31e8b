#pragma once

// Test-only helpers: an independent graph-isomorphism oracle and random
// atom permutations.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <map>
#include <set>
#include <tuple>

#include "retrogate/chem/molecule.hpp"
#include "retrogate/reaction/center.hpp"

namespace retrogate::test_support {

inline std::string data_path(const std::string &name) {
  return std::string(RETROGATE_TEST_DATA) + "/" + name;
}

inline std::vector<std::string> read_lines(const std::string &path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty())
      out.push_back(line);
  return out;
}

inline std::vector<std::uint32_t> random_permutation(std::size_t n, std::mt19937_64 &rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  for (std::size_t i = n; i > 1; --i)
    std::swap(p[i - 1], p[rng() % i]);
  return p;
}

/// Backtracking isomorphism test comparing element, charge, hydrogens,
/// aromaticity, isotope, map number and bond orders. Deliberately naive.
inline bool isomorphic(const chem::Molecule &a, const chem::Molecule &b) {
  using chem::Atom;
  if (a.size() != b.size() || a.bonds().size() != b.bonds().size())
    return false;
  const std::size_t n = a.size();
  auto same_atom = [&](std::uint32_t i, std::uint32_t j) {
    const Atom &x = a.atom(i);
    const Atom &y = b.atom(j);
    return x.element == y.element && x.charge == y.charge && x.hydrogens == y.hydrogens &&
           x.aromatic == y.aromatic && x.isotope == y.isotope && x.map == y.map &&
           a.degree(i) == b.degree(j);
  };
  std::vector<std::int64_t> fwd(n, -1);
  std::vector<bool> used(n, false);
  // Order atoms of `a` so each one after the first in a component has an
  // already-placed neighbour.
  std::vector<std::uint32_t> order;
  std::vector<bool> seen(n, false);
  for (std::uint32_t s = 0; s < n; ++s) {
    if (seen[s])
      continue;
    std::vector<std::uint32_t> queue{s};
    seen[s] = true;
    for (std::size_t k = 0; k < queue.size(); ++k) {
      order.push_back(queue[k]);
      for (const auto &nb : a.neighbors(queue[k]))
        if (!seen[nb.atom]) {
          seen[nb.atom] = true;
          queue.push_back(nb.atom);
        }
    }
  }
  auto consistent = [&](std::uint32_t i, std::uint32_t j) {
    for (const auto &nb : a.neighbors(i)) {
      if (fwd[nb.atom] < 0)
        continue;
      auto bb = b.bond_between(j, static_cast<std::uint32_t>(fwd[nb.atom]));
      if (!bb || b.bond(*bb).order != a.bond(nb.bond).order)
        return false;
    }
    return true;
  };
  auto rec = [&](auto &&self, std::size_t k) -> bool {
    if (k == n)
      return true;
    const std::uint32_t i = order[k];
    for (std::uint32_t j = 0; j < n; ++j) {
      if (used[j] || !same_atom(i, j) || !consistent(i, j))
        continue;
      fwd[i] = j;
      used[j] = true;
      if (self(self, k + 1))
        return true;
      fwd[i] = -1;
      used[j] = false;
    }
    return false;
  };
  return rec(rec, 0);
}

/// Reaction center by global set differences: collect every mapped bond and
/// every mapped atom state on each side, diff them, then report the atoms
/// whose map number is touched by a difference. Unmapped product atoms are
/// always included; unmapped reactant atoms never are.
inline std::vector<reaction::AtomRef> oracle_center(const reaction::Reaction &rxn) {
  using reaction::AtomRef;
  using reaction::Side;
  using State = std::tuple<int, int, bool>;
  using BondKey = std::tuple<int, int, int>;
  std::map<int, State> r_state, p_state;
  std::set<BondKey> r_bonds, p_bonds;
  auto collect = [](const chem::Molecule &m, std::map<int, State> &state, std::set<BondKey> &bonds) {
    for (const auto &a : m.atoms())
      if (a.map)
        state[*a.map] = {a.hydrogens, a.charge, a.aromatic};
    for (const auto &b : m.bonds()) {
      const auto &x = m.atom(b.begin);
      const auto &y = m.atom(b.end);
      if (x.map && y.map)
        bonds.insert({std::min(*x.map, *y.map), std::max(*x.map, *y.map), static_cast<int>(b.order)});
    }
  };
  for (const auto &m : rxn.reactants)
    collect(m, r_state, r_bonds);
  collect(rxn.product, p_state, p_bonds);
  std::set<int> changed;
  for (const auto &[map, st] : r_state) {
    auto it = p_state.find(map);
    if (it == p_state.end() || it->second != st)
      changed.insert(map);
  }
  for (const auto &[map, st] : p_state)
    if (!r_state.count(map))
      changed.insert(map);
  std::vector<BondKey> diff;
  std::set_symmetric_difference(r_bonds.begin(), r_bonds.end(), p_bonds.begin(), p_bonds.end(),
                                std::back_inserter(diff));
  for (const auto &[a, b, order] : diff) {
    changed.insert(a);
    changed.insert(b);
  }
  std::vector<AtomRef> out;
  for (std::uint32_t m = 0; m < rxn.reactants.size(); ++m)
    for (std::uint32_t i = 0; i < rxn.reactants[m].size(); ++i)
      if (auto map = rxn.reactants[m].atom(i).map; map && changed.count(*map))
        out.push_back({Side::Reactant, m, i});
  for (std::uint32_t i = 0; i < rxn.product.size(); ++i) {
    auto map = rxn.product.atom(i).map;
    if (!map || changed.count(*map))
      out.push_back({Side::Product, 0, i});
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace retrogate::test_support

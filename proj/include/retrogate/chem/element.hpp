#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <string_view>

namespace retrogate::chem {

struct ElementInfo {
  std::uint8_t atomic_number;
  std::string_view symbol;
  // Normal valences in increasing order; used for implicit hydrogens of
  // organic-subset atoms. Empty for metals.
  std::array<std::uint8_t, 3> default_valences;
  std::uint8_t n_default_valences;
  std::uint8_t max_valence;
  std::uint8_t group; // periodic table group, 1..18
  bool organic_subset;
  bool aromatic_allowed;

  std::span<const std::uint8_t> valences() const noexcept {
    return {default_valences.data(), n_default_valences};
  }
};

// Elements seen in drug-like reaction corpora. Anything else is rejected
// by the parser with UnknownElement.
inline constexpr std::array<ElementInfo, 36> kElements{{
    {1, "H", {1, 0, 0}, 1, 1, 1, false, false},
    {3, "Li", {}, 0, 1, 1, false, false},
    {5, "B", {3, 0, 0}, 1, 3, 13, true, true},
    {6, "C", {4, 0, 0}, 1, 4, 14, true, true},
    {7, "N", {3, 5, 0}, 2, 5, 15, true, true},
    {8, "O", {2, 0, 0}, 1, 2, 16, true, true},
    {9, "F", {1, 0, 0}, 1, 1, 17, true, false},
    {11, "Na", {}, 0, 1, 1, false, false},
    {12, "Mg", {}, 0, 2, 2, false, false},
    {13, "Al", {}, 0, 3, 13, false, false},
    {14, "Si", {4, 0, 0}, 1, 4, 14, false, false},
    {15, "P", {3, 5, 0}, 2, 5, 15, true, true},
    {16, "S", {2, 4, 6}, 3, 6, 16, true, true},
    {17, "Cl", {1, 0, 0}, 1, 7, 17, true, false},
    {19, "K", {}, 0, 1, 1, false, false},
    {20, "Ca", {}, 0, 2, 2, false, false},
    {22, "Ti", {}, 0, 4, 4, false, false},
    {24, "Cr", {}, 0, 6, 6, false, false},
    {25, "Mn", {}, 0, 7, 7, false, false},
    {26, "Fe", {}, 0, 6, 8, false, false},
    {27, "Co", {}, 0, 6, 9, false, false},
    {28, "Ni", {}, 0, 4, 10, false, false},
    {29, "Cu", {}, 0, 4, 11, false, false},
    {30, "Zn", {}, 0, 4, 12, false, false},
    {32, "Ge", {4, 0, 0}, 1, 4, 14, false, false},
    {33, "As", {3, 5, 0}, 2, 5, 15, false, true},
    {34, "Se", {2, 4, 6}, 3, 6, 16, false, true},
    {35, "Br", {1, 0, 0}, 1, 7, 17, true, false},
    {46, "Pd", {}, 0, 6, 10, false, false},
    {47, "Ag", {}, 0, 2, 11, false, false},
    {50, "Sn", {4, 0, 0}, 1, 4, 14, false, false},
    {52, "Te", {2, 4, 6}, 3, 6, 16, false, true},
    {53, "I", {1, 0, 0}, 1, 7, 17, true, false},
    {55, "Cs", {}, 0, 1, 1, false, false},
    {78, "Pt", {}, 0, 6, 10, false, false},
    {80, "Hg", {}, 0, 2, 12, false, false},
}};

inline const ElementInfo *find_element(std::string_view symbol) noexcept {
  auto it = std::find_if(kElements.begin(), kElements.end(),
                         [&](const ElementInfo &e) { return e.symbol == symbol; });
  return it == kElements.end() ? nullptr : &*it;
}

inline const ElementInfo &element(std::uint8_t atomic_number) {
  auto it = std::find_if(kElements.begin(), kElements.end(), [&](const ElementInfo &e) {
    return e.atomic_number == atomic_number;
  });
  return *it;
}

inline bool known_element(std::uint8_t atomic_number) noexcept {
  return std::any_of(kElements.begin(), kElements.end(), [&](const ElementInfo &e) {
    return e.atomic_number == atomic_number;
  });
}

/// Largest total valence (bond orders + hydrogens) allowed for an element at
/// a given formal charge. Main-group elements shift toward their isoelectronic
/// neighbour: N+ behaves like C, O- like F, B- like C.
inline int max_valence(const ElementInfo &e, int charge) noexcept {
  const int v = e.max_valence;
  if (charge == 0)
    return v;
  const int g = e.group;
  if (g >= 15 && g <= 17) {
    const int base = e.n_default_valences > 0 ? e.default_valences[0] : v;
    // N keeps a neutral valence of 5 only for uncharged nitro-style groups.
    const bool hypervalent = v > base && e.atomic_number != 7;
    if (charge > 0)
      return hypervalent ? std::max(base + charge, v - charge) : base + charge;
    return std::max(0, hypervalent ? v + charge : base + charge);
  }
  if (g == 14)
    return std::max(0, v - std::abs(charge));
  if (g == 13)
    return std::max(0, v - charge);
  return v;
}

} // namespace retrogate::chem

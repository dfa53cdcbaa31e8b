#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "retrogate/chem/smiles.hpp"
#include "retrogate/reaction/center.hpp"

namespace retrogate::scoring {

using reaction::AtomRef;
using reaction::Reaction;

/// Splits SMILES text into tokens: bracket atoms, two-letter organic
/// elements, two-digit ring closures and the ">>" arrow are single tokens,
/// everything else is one character. Returns the start offset of each token.
inline std::vector<std::size_t> token_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  std::size_t i = 0;
  while (i < text.size()) {
    starts.push_back(i);
    const char c = text[i];
    if (c == '[') {
      const auto close = text.find(']', i);
      i = close == std::string_view::npos ? text.size() : close + 1;
    } else if ((c == 'C' && i + 1 < text.size() && text[i + 1] == 'l') ||
               (c == 'B' && i + 1 < text.size() && text[i + 1] == 'r') ||
               (c == '>' && i + 1 < text.size() && text[i + 1] == '>')) {
      i += 2;
    } else if (c == '%' && i + 2 < text.size()) {
      i += 3;
    } else {
      ++i;
    }
  }
  return starts;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  const auto starts = token_starts(text);
  std::vector<std::string> out;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const std::size_t end = k + 1 < starts.size() ? starts[k + 1] : text.size();
    out.emplace_back(text.substr(starts[k], end - starts[k]));
  }
  return out;
}

/// A reaction written as "reactants>>product" with canonical, map-free
/// SMILES (reactants sorted by text) plus the token index of every atom.
struct SerializedReaction {
  std::string text;
  std::vector<std::string> tokens;
  std::map<AtomRef, std::size_t> atom_token;
};

inline SerializedReaction serialize(const std::vector<chem::Molecule> &reactants, const chem::Molecule &product) {
  struct Part {
    chem::SmilesOutput smiles;
    AtomRef first;
  };
  const chem::WriteOptions opts{true, false};
  std::vector<Part> parts;
  for (std::uint32_t m = 0; m < reactants.size(); ++m)
    parts.push_back({chem::write_smiles_detailed(reactants[m], opts), {reaction::Side::Reactant, m, 0}});
  std::stable_sort(parts.begin(), parts.end(),
                   [](const Part &a, const Part &b) { return a.smiles.text < b.smiles.text; });
  parts.push_back({chem::write_smiles_detailed(product, opts), {reaction::Side::Product, 0, 0}});

  SerializedReaction out;
  std::vector<std::pair<std::size_t, AtomRef>> atom_offsets;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (p + 1 == parts.size())
      out.text += ">>";
    else if (p > 0)
      out.text += '.';
    const std::size_t base = out.text.size();
    out.text += parts[p].smiles.text;
    for (std::uint32_t i = 0; i < parts[p].smiles.atom_offsets.size(); ++i)
      atom_offsets.emplace_back(base + parts[p].smiles.atom_offsets[i],
                                AtomRef{parts[p].first.side, parts[p].first.mol, i});
  }
  const auto starts = token_starts(out.text);
  out.tokens = tokenize(out.text);
  for (const auto &[offset, ref] : atom_offsets) {
    const auto it = std::lower_bound(starts.begin(), starts.end(), offset);
    out.atom_token[ref] = static_cast<std::size_t>(it - starts.begin());
  }
  return out;
}

inline SerializedReaction serialize(const Reaction &rxn) { return serialize(rxn.reactants, rxn.product); }

} // namespace retrogate::scoring

#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "retrogate/chem/smiles.hpp"
#include "retrogate/error.hpp"
#include "retrogate/hash.hpp"

namespace retrogate::reaction {

using chem::Molecule;

/// Atom-mapped reaction. Reactants are one Molecule per dot-separated
/// component; the product is kept whole. Agents are carried as raw text.
struct Reaction {
  std::vector<Molecule> reactants;
  Molecule product;
  std::string agents;
  std::string id;
  std::string reaction_class;
};

/// Checks the mapping invariants: each map number at most once among all
/// reactant atoms (the product is checked by Molecule itself) and at least
/// one mapped product atom.
inline void validate(const Reaction &rxn) {
  std::unordered_set<int> seen;
  for (const Molecule &m : rxn.reactants)
    for (const auto &a : m.atoms())
      if (a.map && !seen.insert(*a.map).second)
        throw Error(ErrorCode::DuplicateMapNumber,
                    "map number " + std::to_string(*a.map) + " repeated among reactants");
  if (!rxn.product.has_maps())
    throw Error(ErrorCode::NoMappedAtoms, "product has no mapped atoms");
}

inline Reaction make_reaction(std::vector<Molecule> reactants, Molecule product, std::string id = {},
                              std::string reaction_class = {}) {
  Reaction rxn{std::move(reactants), std::move(product), {}, std::move(id), std::move(reaction_class)};
  validate(rxn);
  return rxn;
}

/// Parses "reactants>agents>product" (or "reactants>>product"). Errors keep
/// the offset of the offending byte within `text`.
inline Reaction parse_reaction(std::string_view text) {
  const auto first = text.find('>');
  if (first == std::string_view::npos)
    throw Error(ErrorCode::InvalidReaction, "reaction must contain '>'");
  const auto second = text.find('>', first + 1);
  if (second == std::string_view::npos)
    throw Error(ErrorCode::InvalidReaction, "reaction must have three '>'-separated fields", first);
  if (text.find('>', second + 1) != std::string_view::npos)
    throw Error(ErrorCode::InvalidReaction, "too many '>' separators", second);
  auto parse_part = [&](std::size_t begin, std::size_t end) {
    try {
      return chem::parse_smiles(text.substr(begin, end - begin));
    } catch (const Error &e) {
      throw Error(e.code(), e.detail(), e.offset() ? std::optional<std::size_t>(*e.offset() + begin)
                                                   : std::nullopt);
    }
  };
  Reaction rxn;
  rxn.reactants = parse_part(0, first).split_components();
  rxn.agents = std::string(text.substr(first + 1, second - first - 1));
  rxn.product = parse_part(second + 1, text.size());
  validate(rxn);
  return rxn;
}

/// Reaction SMILES with the reactant molecules in their stored order.
inline std::string reaction_smiles(const Reaction &rxn, bool canonical = true) {
  std::string out;
  for (std::size_t i = 0; i < rxn.reactants.size(); ++i) {
    if (i)
      out += '.';
    out += chem::write_smiles(rxn.reactants[i], canonical);
  }
  out += '>';
  out += rxn.agents;
  out += '>';
  out += chem::write_smiles(rxn.product, canonical);
  return out;
}

/// Canonical identity of the unmapped molecules of a side, sorted and
/// dot-joined.
inline std::string side_key(const std::vector<Molecule> &mols) {
  std::vector<std::string> parts;
  for (const Molecule &m : mols)
    for (const Molecule &frag : m.split_components())
      parts.push_back(chem::canonical_smiles(frag));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i)
      out += '.';
    out += parts[i];
  }
  return out;
}

/// Map-free canonical reaction string used for deduplication:
/// "sorted reactants>>product".
inline std::string canonical_reaction_key(const Reaction &rxn) {
  return side_key(rxn.reactants) + ">>" + side_key({rxn.product});
}

struct CorpusIssue {
  std::size_t line = 0;
  std::string message;
};

struct Corpus {
  std::vector<Reaction> reactions;
  std::vector<CorpusIssue> issues;
};

/// One reaction per line: reaction SMILES, then optional tab-separated id
/// and class. Blank lines and lines starting with '#' are skipped. Lines
/// without an id get "line{N}". Malformed records are collected, not fatal.
inline Corpus parse_corpus(std::istream &in) {
  Corpus corpus;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos)
        break;
      start = tab + 1;
    }
    try {
      Reaction rxn = parse_reaction(fields[0]);
      rxn.id = fields.size() > 1 && !fields[1].empty() ? fields[1] : "line" + std::to_string(number);
      if (fields.size() > 2)
        rxn.reaction_class = fields[2];
      corpus.reactions.push_back(std::move(rxn));
    } catch (const Error &e) {
      corpus.issues.push_back({number, e.what()});
    }
  }
  return corpus;
}

inline Corpus read_corpus(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::Io, "cannot open corpus file " + path);
  return parse_corpus(in);
}

inline std::string corpus_line(const Reaction &rxn) {
  std::string out = reaction_smiles(rxn, false);
  if (!rxn.id.empty() || !rxn.reaction_class.empty())
    out += "\t" + rxn.id;
  if (!rxn.reaction_class.empty())
    out += "\t" + rxn.reaction_class;
  return out;
}

/// Order-sensitive digest of a corpus, stored in index and model headers.
inline std::uint64_t corpus_hash(const std::vector<Reaction> &reactions) {
  std::uint64_t h = fnv1a("corpus");
  for (const Reaction &r : reactions)
    h = hash_combine(hash_combine(h, fnv1a(r.id)), fnv1a(reaction_smiles(r, false)));
  return h;
}

} // namespace retrogate::reaction

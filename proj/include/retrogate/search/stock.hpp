#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "retrogate/chem/smiles.hpp"
#include "retrogate/error.hpp"

namespace retrogate::search {

/// Purchasable starting materials, compared by canonical SMILES.
class BuildingBlockSet {
public:
  BuildingBlockSet() = default;

  explicit BuildingBlockSet(const std::vector<std::string> &smiles, std::string source = {})
      : source_(std::move(source)) {
    for (const std::string &s : smiles)
      canon_.insert(chem::canonical_smiles(chem::parse_smiles(s).without_maps()));
  }

  /// One SMILES per line; blank lines and '#' comments are skipped. A
  /// malformed line is an error naming its line number.
  static BuildingBlockSet load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
      throw Error(ErrorCode::Io, "cannot open stock file " + path);
    BuildingBlockSet set;
    set.source_ = path;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
      const auto end = line.find_first_of(" \t\r");
      const std::string smiles = line.substr(0, end);
      if (smiles.empty() || smiles[0] == '#')
        continue;
      try {
        set.canon_.insert(chem::canonical_smiles(chem::parse_smiles(smiles).without_maps()));
      } catch (const Error &e) {
        throw Error(e.code(), path + " line " + std::to_string(number) + ": " + e.detail());
      }
    }
    return set;
  }

  bool contains(const chem::Molecule &mol) const {
    return canon_.count(chem::canonical_smiles(mol.without_maps())) > 0;
  }
  bool contains_canonical(const std::string &canonical) const { return canon_.count(canonical) > 0; }

  std::size_t size() const noexcept { return canon_.size(); }
  const std::string &source() const noexcept { return source_; }
  const std::set<std::string> &canonical() const noexcept { return canon_; }

private:
  std::set<std::string> canon_;
  std::string source_;
};

} // namespace retrogate::search

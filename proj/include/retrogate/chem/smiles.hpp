#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retrogate/chem/canon.hpp"
#include "retrogate/chem/element.hpp"
#include "retrogate/chem/molecule.hpp"
#include "retrogate/error.hpp"
#include "retrogate/hash.hpp"

namespace retrogate::chem {

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Atom as read from text, before hydrogens are resolved. Reaction templates
/// reuse this layer: in a template a bracket atom without an H field leaves
/// the hydrogen count unconstrained.
struct ParsedAtom {
  Atom atom;
  bool bracket = false;
  bool hydrogens_given = false;
  std::size_t offset = 0;
};

struct ParsedGraph {
  std::vector<ParsedAtom> atoms;
  std::vector<Bond> bonds;
};

namespace detail {

struct PendingBond {
  std::optional<BondOrder> order;
  char stereo = 0;
  std::size_t offset = 0;
  bool present = false;
};

struct RingOpen {
  std::uint32_t atom;
  PendingBond bond;
  std::size_t offset;
};

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  ParsedGraph run() {
    if (text_.empty())
      throw Error(ErrorCode::EmptyInput, "empty SMILES", 0);
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (!prev_)
          throw Error(ErrorCode::UnbalancedBranch, "branch without a preceding atom", pos_);
        if (pending_.present)
          throw Error(ErrorCode::InvalidBond, "bond symbol before branch", pending_.offset);
        branches_.push_back({*prev_, pos_});
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty())
          throw Error(ErrorCode::UnbalancedBranch, "unmatched ')'", pos_);
        if (pending_.present)
          throw Error(ErrorCode::InvalidBond, "dangling bond symbol", pending_.offset);
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending_.present)
          throw Error(ErrorCode::InvalidBond, "dangling bond symbol", pending_.offset);
        if (!branches_.empty())
          throw Error(ErrorCode::UnbalancedBranch, "'.' inside a branch", pos_);
        prev_.reset();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (pending_.present)
          throw Error(ErrorCode::InvalidBond, "two consecutive bond symbols", pos_);
        pending_.present = true;
        pending_.offset = pos_;
        pending_.stereo = 0;
        switch (c) {
        case '-': pending_.order = BondOrder::Single; break;
        case '=': pending_.order = BondOrder::Double; break;
        case '#': pending_.order = BondOrder::Triple; break;
        case ':': pending_.order = BondOrder::Aromatic; break;
        default:
          pending_.order = BondOrder::Single;
          pending_.stereo = c;
          break;
        }
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_closure();
      } else if (c == '[') {
        add_atom(bracket_atom());
      } else if (c == '$') {
        throw Error(ErrorCode::UnsupportedFeature, "quadruple bonds are not supported", pos_);
      } else {
        add_atom(organic_atom());
      }
    }
    if (pending_.present)
      throw Error(ErrorCode::InvalidBond, "dangling bond symbol", pending_.offset);
    if (!branches_.empty())
      throw Error(ErrorCode::UnbalancedBranch, "unclosed branch", text_.size());
    if (!rings_.empty())
      throw Error(ErrorCode::UnclosedRingBond, "ring bond " + std::to_string(rings_.begin()->first) +
                                                   " never closed",
                  rings_.begin()->second.offset);
    return std::move(graph_);
  }

private:
  void add_atom(ParsedAtom atom) {
    const auto idx = static_cast<std::uint32_t>(graph_.atoms.size());
    graph_.atoms.push_back(std::move(atom));
    if (prev_)
      connect(*prev_, idx, pending_, graph_.atoms.back().offset);
    else if (pending_.present)
      throw Error(ErrorCode::InvalidBond, "bond symbol without a preceding atom", pending_.offset);
    pending_ = {};
    prev_ = idx;
  }

  void connect(std::uint32_t a, std::uint32_t b, const PendingBond &spec, std::size_t offset) {
    if (a == b)
      throw Error(ErrorCode::InvalidBond, "ring closure onto the same atom", offset);
    for (const Bond &existing : graph_.bonds)
      if ((existing.begin == a && existing.end == b) || (existing.begin == b && existing.end == a))
        throw Error(ErrorCode::InvalidBond, "duplicate bond", offset);
    Bond bond;
    bond.begin = a;
    bond.end = b;
    bond.stereo = spec.stereo;
    if (spec.order)
      bond.order = *spec.order;
    else if (graph_.atoms[a].atom.aromatic && graph_.atoms[b].atom.aromatic)
      bond.order = BondOrder::Aromatic;
    else
      bond.order = BondOrder::Single;
    graph_.bonds.push_back(bond);
  }

  void ring_closure() {
    const std::size_t start = pos_;
    int number = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
        throw Error(ErrorCode::UnexpectedCharacter, "'%' must be followed by two digits", pos_);
      number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      number = text_[pos_] - '0';
      ++pos_;
    }
    if (!prev_)
      throw Error(ErrorCode::UnexpectedCharacter, "ring bond without a preceding atom", start);
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, RingOpen{*prev_, pending_, start});
    } else {
      PendingBond spec = it->second.bond;
      if (pending_.present) {
        if (spec.present && (spec.order != pending_.order || spec.stereo != pending_.stereo))
          throw Error(ErrorCode::InvalidBond, "conflicting ring bond symbols", pending_.offset);
        spec = pending_;
      }
      connect(it->second.atom, *prev_, spec, start);
      rings_.erase(it);
    }
    pending_ = {};
  }

  ParsedAtom organic_atom() {
    ParsedAtom out;
    out.offset = pos_;
    const char c = text_[pos_];
    std::string_view symbol;
    bool aromatic = false;
    if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
      symbol = "Cl";
    } else if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
      symbol = "Br";
    } else {
      static constexpr std::string_view kAliphatic = "BCNOPSFI";
      static constexpr std::string_view kAromatic = "bcnops";
      if (kAliphatic.find(c) != std::string_view::npos) {
        symbol = text_.substr(pos_, 1);
      } else if (kAromatic.find(c) != std::string_view::npos) {
        symbol = text_.substr(pos_, 1);
        aromatic = true;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
        throw Error(ErrorCode::UnknownElement,
                    "'" + std::string(1, c) + "' is not an organic-subset atom", pos_);
      } else {
        throw Error(ErrorCode::UnexpectedCharacter, "unexpected '" + std::string(1, c) + "'", pos_);
      }
    }
    std::string upper(symbol);
    upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
    const ElementInfo *e = find_element(upper);
    out.atom.element = e->atomic_number;
    out.atom.aromatic = aromatic;
    pos_ += symbol.size();
    return out;
  }

  int read_int() {
    int value = 0;
    std::size_t digits = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      if (++digits > 6)
        throw Error(ErrorCode::UnexpectedCharacter, "number too long", pos_);
      value = value * 10 + (text_[pos_] - '0');
      ++pos_;
    }
    return value;
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  ParsedAtom bracket_atom() {
    ParsedAtom out;
    out.bracket = true;
    out.offset = pos_;
    ++pos_; // '['
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      const std::size_t at_iso = pos_;
      const int iso = read_int();
      if (iso <= 0)
        throw Error(ErrorCode::UnexpectedCharacter, "isotope must be positive", at_iso);
      out.atom.isotope = iso;
    }
    // Element symbol: aromatic two-letter forms first, then the longest
    // matching element symbol.
    const std::size_t sym_at = pos_;
    if (pos_ >= text_.size())
      throw Error(ErrorCode::UnexpectedCharacter, "unterminated bracket atom", out.offset);
    const ElementInfo *e = nullptr;
    if (std::islower(static_cast<unsigned char>(text_[pos_]))) {
      for (std::string_view sym : {"se", "as", "te", "b", "c", "n", "o", "p", "s"}) {
        if (text_.substr(pos_, sym.size()) == sym) {
          std::string upper(sym);
          upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
          e = find_element(upper);
          out.atom.aromatic = true;
          pos_ += sym.size();
          break;
        }
      }
    } else if (std::isupper(static_cast<unsigned char>(text_[pos_]))) {
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1])))
        e = find_element(text_.substr(pos_, 2));
      if (e) {
        pos_ += 2;
      } else {
        e = find_element(text_.substr(pos_, 1));
        if (e)
          pos_ += 1;
      }
    }
    if (!e) {
      std::size_t end = sym_at;
      while (end < text_.size() && std::isalpha(static_cast<unsigned char>(text_[end])) &&
             (end == sym_at || std::islower(static_cast<unsigned char>(text_[end]))))
        ++end;
      throw Error(ErrorCode::UnknownElement,
                  "unknown element '" + std::string(text_.substr(sym_at, std::max<std::size_t>(1, end - sym_at))) + "'",
                  sym_at);
    }
    if (out.atom.aromatic && !e->aromatic_allowed)
      throw Error(ErrorCode::UnknownElement, "element cannot be aromatic", sym_at);
    out.atom.element = e->atomic_number;

    if (at('@')) {
      const std::size_t s = pos_;
      ++pos_;
      if (at('@')) {
        ++pos_;
      } else {
        while (pos_ < text_.size() && (std::isupper(static_cast<unsigned char>(text_[pos_])) &&
                                       text_[pos_] != 'H'))
          ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
      out.atom.stereo = std::string(text_.substr(s, pos_ - s));
    }
    if (at('H')) {
      ++pos_;
      out.hydrogens_given = true;
      out.atom.hydrogens = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        out.atom.hydrogens = read_int();
    }
    if (at('+') || at('-')) {
      const char sign = text_[pos_];
      const std::size_t charge_at = pos_;
      int magnitude = 1;
      ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        magnitude = read_int();
      } else {
        while (at(sign)) {
          ++magnitude;
          ++pos_;
        }
      }
      if (at('+') || at('-') || magnitude == 0 || magnitude > 8)
        throw Error(ErrorCode::InvalidCharge, "malformed charge", charge_at);
      out.atom.charge = sign == '+' ? magnitude : -magnitude;
    }
    if (at(':')) {
      ++pos_;
      const std::size_t map_at = pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        throw Error(ErrorCode::UnexpectedCharacter, "map number expected", map_at);
      const int map = read_int();
      if (map > 0)
        out.atom.map = map;
    }
    if (!at(']'))
      throw Error(ErrorCode::UnexpectedCharacter, "expected ']' in bracket atom", pos_);
    ++pos_;
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  ParsedGraph graph_;
  std::optional<std::uint32_t> prev_;
  PendingBond pending_;
  std::vector<std::pair<std::uint32_t, std::size_t>> branches_;
  std::map<int, RingOpen> rings_;
};

} // namespace detail

/// Tokenises and assembles a SMILES string without resolving hydrogens.
inline ParsedGraph parse_graph(std::string_view text) {
  return detail::SmilesParser(text).run();
}

/// Parses the supported SMILES subset: organic-subset and bracket atoms,
/// bond symbols - = # : (plus / \ kept as opaque marks), branches, ring
/// closures including %nn, and dot-separated fragments.
inline Molecule parse_smiles(std::string_view text) {
  ParsedGraph g = parse_graph(text);
  std::vector<int> bond_sum(g.atoms.size(), 0);
  for (const Bond &b : g.bonds) {
    bond_sum[b.begin] += valence_contribution(b.order);
    bond_sum[b.end] += valence_contribution(b.order);
  }
  std::vector<Atom> atoms;
  atoms.reserve(g.atoms.size());
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    ParsedAtom &pa = g.atoms[i];
    if (!pa.bracket)
      pa.atom.hydrogens = implicit_hydrogens(element(pa.atom.element), bond_sum[i], pa.atom.aromatic);
    atoms.push_back(std::move(pa.atom));
  }
  try {
    return Molecule(std::move(atoms), std::move(g.bonds));
  } catch (const Error &e) {
    // Locate valence problems in the source text where possible.
    if (e.code() == ErrorCode::ValenceExceeded || e.code() == ErrorCode::DuplicateMapNumber) {
      const std::string &msg = e.detail();
      auto pos = msg.find(" atom ");
      if (pos != std::string::npos) {
        std::size_t idx = std::stoul(msg.substr(pos + 6));
        if (idx < g.atoms.size())
          throw Error(e.code(), msg, g.atoms[idx].offset);
      }
    }
    throw;
  }
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

struct GraphText {
  std::string text;
  std::vector<std::size_t> atom_offsets; // byte offset of each atom's token
  std::vector<std::uint32_t> atom_order; // atoms in output order
};

/// Depth-first SMILES layout shared by molecules and templates. Neighbours
/// are visited in increasing `priority`; ring closures are emitted before
/// branches; fragments start at their lowest-priority atom.
template <class Adjacency>
GraphText layout_smiles(std::size_t n, Adjacency &&adjacency, std::span<const std::string> atom_tokens,
                        std::span<const std::string> bond_tokens,
                        std::span<const std::uint32_t> priority) {
  GraphText out;
  out.atom_offsets.assign(n, 0);
  if (n == 0)
    return out;

  std::vector<std::uint32_t> by_priority(n);
  for (std::uint32_t i = 0; i < n; ++i)
    by_priority[i] = i;
  std::sort(by_priority.begin(), by_priority.end(),
            [&](std::uint32_t a, std::uint32_t b) { return priority[a] < priority[b]; });

  auto sorted_neighbors = [&](std::uint32_t a) {
    std::vector<Neighbor> nbs(adjacency(a).begin(), adjacency(a).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor &x, const Neighbor &y) {
      return priority[x.atom] < priority[y.atom];
    });
    return nbs;
  };

  // Pass 1: spanning forest and ring-closure edges.
  std::vector<bool> visited(n, false);
  std::vector<std::vector<Neighbor>> children(n);
  std::vector<std::vector<Neighbor>> ring_open(n);  // at ancestor
  std::vector<std::vector<Neighbor>> ring_close(n); // at descendant
  std::vector<std::int64_t> parent_bond(n, -1);
  std::vector<bool> bond_seen;
  std::size_t max_bond = 0;
  for (std::uint32_t a = 0; a < n; ++a)
    for (const Neighbor &nb : adjacency(a))
      max_bond = std::max<std::size_t>(max_bond, nb.bond + 1);
  bond_seen.assign(max_bond, false);

  std::vector<std::uint32_t> roots;
  for (std::uint32_t start : by_priority) {
    if (visited[start])
      continue;
    roots.push_back(start);
    // Iterative DFS keeping neighbour cursors so visiting order matches a
    // recursive traversal.
    struct Frame {
      std::uint32_t atom;
      std::vector<Neighbor> nbs;
      std::size_t next = 0;
    };
    std::vector<Frame> stack;
    visited[start] = true;
    stack.push_back({start, sorted_neighbors(start), 0});
    while (!stack.empty()) {
      Frame &f = stack.back();
      if (f.next >= f.nbs.size()) {
        stack.pop_back();
        continue;
      }
      const Neighbor nb = f.nbs[f.next++];
      if (bond_seen[nb.bond])
        continue;
      bond_seen[nb.bond] = true;
      if (visited[nb.atom]) {
        // Back edge: nb.atom is an ancestor currently on the stack.
        ring_open[nb.atom].push_back({f.atom, nb.bond});
        ring_close[f.atom].push_back({nb.atom, nb.bond});
      } else {
        visited[nb.atom] = true;
        children[f.atom].push_back(nb);
        parent_bond[nb.atom] = nb.bond;
        const std::uint32_t child = nb.atom;
        stack.push_back({child, sorted_neighbors(child), 0});
      }
    }
  }

  // Pass 2: emit.
  std::array<bool, 100> digit_used{};
  std::vector<int> bond_digit(max_bond, 0);
  auto digit_text = [](int d) {
    return d < 10 ? std::string(1, static_cast<char>('0' + d)) : "%" + std::to_string(d);
  };

  for (std::size_t r = 0; r < roots.size(); ++r) {
    if (r > 0)
      out.text += '.';
    // Pending output actions: 0 atom, 1 ')', 2 '(' + bond, 3 bond.
    std::vector<std::pair<int, std::uint32_t>> work;
    work.push_back({0, roots[r]});
    while (!work.empty()) {
      auto [kind, value] = work.back();
      work.pop_back();
      if (kind == 1) {
        out.text += ')';
        continue;
      }
      if (kind == 2) {
        out.text += '(';
        out.text += bond_tokens[value];
        continue;
      }
      if (kind == 3) {
        out.text += bond_tokens[value];
        continue;
      }
      const std::uint32_t a = value;
      out.atom_offsets[a] = out.text.size();
      out.atom_order.push_back(a);
      out.text += atom_tokens[a];
      // Closings first (digits allocated earlier), then openings.
      std::vector<int> freed;
      for (const Neighbor &nb : ring_close[a]) {
        const int d = bond_digit[nb.bond];
        out.text += digit_text(d);
        freed.push_back(d);
      }
      for (const Neighbor &nb : ring_open[a]) {
        int d = 1;
        while (d < 100 && (digit_used[d] ||
                           std::find(freed.begin(), freed.end(), d) != freed.end()))
          ++d;
        if (d >= 100)
          throw Error(ErrorCode::UnsupportedFeature, "more than 99 open ring bonds");
        digit_used[d] = true;
        bond_digit[nb.bond] = d;
        out.text += bond_tokens[nb.bond];
        out.text += digit_text(d);
      }
      for (int d : freed)
        digit_used[d] = false;
      const auto &kids = children[a];
      // Push in reverse so the first branch is emitted first; the last child
      // continues the main chain without parentheses.
      for (std::size_t k = kids.size(); k-- > 0;) {
        const Neighbor &nb = kids[k];
        if (k + 1 == kids.size()) {
          work.push_back({0, nb.atom});
          work.push_back({3, nb.bond});
        } else {
          work.push_back({1, 0});
          work.push_back({0, nb.atom});
          work.push_back({2, nb.bond});
        }
      }
    }
  }
  return out;
}

inline bool organic_subset_symbol(const ElementInfo &e, bool aromatic) {
  if (aromatic)
    return e.organic_subset && e.aromatic_allowed;
  return e.organic_subset;
}

/// Text of one atom as it appears in a SMILES string. Bare symbols are used
/// whenever the parser would reproduce the atom exactly.
inline std::string atom_token(const Molecule &mol, std::uint32_t i, bool include_map = true) {
  const Atom &a = mol.atom(i);
  const ElementInfo &e = element(a.element);
  std::string symbol(e.symbol);
  if (a.aromatic) {
    for (char &c : symbol)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const bool mapped = include_map && a.map.has_value();
  if (organic_subset_symbol(e, a.aromatic) && a.charge == 0 && !a.isotope && !mapped &&
      a.stereo.empty() && implicit_hydrogens(e, mol.bond_sum(i), a.aromatic) == a.hydrogens)
    return symbol;
  std::string t = "[";
  if (a.isotope)
    t += std::to_string(*a.isotope);
  t += symbol;
  t += a.stereo;
  if (a.hydrogens > 0) {
    t += 'H';
    if (a.hydrogens > 1)
      t += std::to_string(a.hydrogens);
  }
  if (a.charge != 0) {
    t += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1)
      t += std::to_string(std::abs(a.charge));
  }
  if (mapped) {
    t += ':';
    t += std::to_string(*a.map);
  }
  t += ']';
  return t;
}

inline std::string bond_token(const Molecule &mol, std::uint32_t b) {
  const Bond &bond = mol.bond(b);
  const bool both_aromatic = mol.atom(bond.begin).aromatic && mol.atom(bond.end).aromatic;
  switch (bond.order) {
  case BondOrder::Single:
    if (bond.stereo)
      return std::string(1, bond.stereo);
    return both_aromatic ? "-" : "";
  case BondOrder::Double: return "=";
  case BondOrder::Triple: return "#";
  case BondOrder::Aromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

namespace detail {

inline LabeledGraph molecule_graph(const Molecule &mol, const std::vector<std::string> &tokens) {
  LabeledGraph g(mol.size());
  for (std::uint32_t i = 0; i < mol.size(); ++i) {
    const Atom &a = mol.atom(i);
    std::uint64_t h = a.element;
    h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 16));
    h = hash_combine(h, mol.degree(i));
    h = hash_combine(h, static_cast<std::uint64_t>(a.hydrogens));
    h = hash_combine(h, a.aromatic ? 1 : 0);
    h = hash_combine(h, static_cast<std::uint64_t>(a.isotope.value_or(0)));
    h = hash_combine(h, static_cast<std::uint64_t>(a.map.value_or(0)));
    g.node_labels[i] = h;
    g.node_identity[i] = hash_combine(h, fnv1a(tokens[i]));
  }
  for (std::uint32_t b = 0; b < mol.bonds().size(); ++b) {
    const Bond &bond = mol.bond(b);
    const auto order = static_cast<std::uint64_t>(bond.order);
    g.add_edge(bond.begin, bond.end, order, order * 256 + static_cast<unsigned char>(bond.stereo));
  }
  return g;
}

} // namespace detail

struct SmilesOutput {
  std::string text;
  std::vector<std::size_t> atom_offsets;
  std::vector<std::uint32_t> atom_order;
  std::vector<std::uint32_t> ranks; // empty for non-canonical output
};

struct WriteOptions {
  bool canonical = true;
  bool include_maps = true;
};

/// Writes SMILES with per-atom offsets. Canonical output depends only on the
/// isomorphism class of the labelled molecule.
inline SmilesOutput write_smiles_detailed(const Molecule &mol, WriteOptions opts = {}) {
  std::vector<std::string> atoms(mol.size());
  for (std::uint32_t i = 0; i < mol.size(); ++i)
    atoms[i] = atom_token(mol, i, opts.include_maps);
  std::vector<std::string> bonds(mol.bonds().size());
  for (std::uint32_t b = 0; b < bonds.size(); ++b)
    bonds[b] = bond_token(mol, b);
  auto adjacency = [&](std::uint32_t a) { return mol.neighbors(a); };

  SmilesOutput out;
  if (!opts.canonical) {
    std::vector<std::uint32_t> order(mol.size());
    for (std::uint32_t i = 0; i < order.size(); ++i)
      order[i] = i;
    GraphText t = layout_smiles(mol.size(), adjacency, atoms, bonds, order);
    out.text = std::move(t.text);
    out.atom_offsets = std::move(t.atom_offsets);
    out.atom_order = std::move(t.atom_order);
    return out;
  }
  LabeledGraph g = detail::molecule_graph(mol, atoms);
  if (!opts.include_maps) {
    for (std::uint32_t i = 0; i < mol.size(); ++i) {
      // Map numbers are not printed, so they must not split classes.
      const Atom &a = mol.atom(i);
      std::uint64_t h = a.element;
      h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 16));
      h = hash_combine(h, mol.degree(i));
      h = hash_combine(h, static_cast<std::uint64_t>(a.hydrogens));
      h = hash_combine(h, a.aromatic ? 1 : 0);
      h = hash_combine(h, static_cast<std::uint64_t>(a.isotope.value_or(0)));
      g.node_labels[i] = h;
      g.node_identity[i] = hash_combine(h, fnv1a(atoms[i]));
    }
  }
  auto render = [&](const std::vector<std::uint32_t> &ranks) {
    return layout_smiles(mol.size(), adjacency, atoms, bonds, ranks).text;
  };
  out.ranks = canonical_ranking(g, render);
  GraphText t = layout_smiles(mol.size(), adjacency, atoms, bonds, out.ranks);
  out.text = std::move(t.text);
  out.atom_offsets = std::move(t.atom_offsets);
  out.atom_order = std::move(t.atom_order);
  return out;
}

inline std::string write_smiles(const Molecule &mol, bool canonical = true) {
  return write_smiles_detailed(mol, {canonical, true}).text;
}

/// Canonical SMILES ignoring atom-map numbers; the identity used for stock
/// lookup and deduplication.
inline std::string canonical_smiles(const Molecule &mol) {
  return write_smiles_detailed(mol, {true, false}).text;
}

/// Canonical ranks (a permutation of 0..n-1), one per atom.
inline std::vector<std::uint32_t> canonical_rank(const Molecule &mol) {
  return write_smiles_detailed(mol, {true, true}).ranks;
}

} // namespace retrogate::chem

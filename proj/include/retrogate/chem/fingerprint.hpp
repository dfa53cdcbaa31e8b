#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "retrogate/chem/molecule.hpp"
#include "retrogate/error.hpp"
#include "retrogate/hash.hpp"

namespace retrogate::chem {

class Fingerprint {
public:
  Fingerprint() = default;
  Fingerprint(int radius, int n_bits)
      : radius_(radius), n_bits_(n_bits), words_((static_cast<std::size_t>(n_bits) + 63) / 64, 0) {}

  int radius() const noexcept { return radius_; }
  int n_bits() const noexcept { return n_bits_; }

  bool test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1U; }
  void set(std::size_t bit) { words_[bit / 64] |= std::uint64_t{1} << (bit % 64); }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (std::uint64_t w : words_)
      n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::vector<std::uint32_t> on_bits() const {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n_bits_); ++i)
      if (test(i))
        out.push_back(static_cast<std::uint32_t>(i));
    return out;
  }

  const std::vector<std::uint64_t> &words() const noexcept { return words_; }

  Fingerprint operator|(const Fingerprint &o) const { return combine(o, [](auto a, auto b) { return a | b; }); }
  Fingerprint operator&(const Fingerprint &o) const { return combine(o, [](auto a, auto b) { return a & b; }); }
  Fingerprint operator^(const Fingerprint &o) const { return combine(o, [](auto a, auto b) { return a ^ b; }); }

  friend bool operator==(const Fingerprint &, const Fingerprint &) = default;

  /// "r{radius}b{n_bits}:" followed by the bit vector as hex, byte k holding
  /// bits 8k..8k+7 with bit 8k as its least significant bit.
  std::string to_string() const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "r" + std::to_string(radius_) + "b" + std::to_string(n_bits_) + ":";
    for (std::size_t byte = 0; byte < static_cast<std::size_t>(n_bits_) / 8; ++byte) {
      const auto v = static_cast<unsigned>((words_[byte / 8] >> (8 * (byte % 8))) & 0xffU);
      out += kHex[v >> 4];
      out += kHex[v & 0xfU];
    }
    return out;
  }

  static Fingerprint from_string(std::string_view text) {
    auto fail = [&](const char *why) { return Error(ErrorCode::ParseError, why); };
    if (text.empty() || text[0] != 'r')
      throw fail("fingerprint must start with 'r'");
    const auto b = text.find('b');
    const auto colon = text.find(':');
    if (b == std::string_view::npos || colon == std::string_view::npos || b > colon)
      throw fail("malformed fingerprint header");
    int radius = 0;
    int n_bits = 0;
    try {
      radius = std::stoi(std::string(text.substr(1, b - 1)));
      n_bits = std::stoi(std::string(text.substr(b + 1, colon - b - 1)));
    } catch (const std::exception &) {
      throw fail("malformed fingerprint header");
    }
    if (n_bits <= 0 || n_bits % 64 != 0 || radius < 0)
      throw Error(ErrorCode::InvalidParams, "bad fingerprint parameters");
    const std::string_view hex = text.substr(colon + 1);
    if (hex.size() != static_cast<std::size_t>(n_bits) / 4)
      throw fail("hex payload length does not match n_bits");
    Fingerprint fp(radius, n_bits);
    auto nibble = [&](char c) -> unsigned {
      if (c >= '0' && c <= '9')
        return static_cast<unsigned>(c - '0');
      if (c >= 'a' && c <= 'f')
        return static_cast<unsigned>(c - 'a' + 10);
      throw fail("invalid hex digit");
    };
    for (std::size_t byte = 0; byte < hex.size() / 2; ++byte) {
      const std::uint64_t v = (nibble(hex[2 * byte]) << 4) | nibble(hex[2 * byte + 1]);
      fp.words_[byte / 8] |= v << (8 * (byte % 8));
    }
    return fp;
  }

private:
  template <class Op> Fingerprint combine(const Fingerprint &o, Op op) const {
    if (n_bits_ != o.n_bits_)
      throw Error(ErrorCode::WidthMismatch, "fingerprint widths differ");
    Fingerprint out(radius_, n_bits_);
    for (std::size_t i = 0; i < words_.size(); ++i)
      out.words_[i] = op(words_[i], o.words_[i]);
    return out;
  }

  int radius_ = 0;
  int n_bits_ = 0;
  std::vector<std::uint64_t> words_;
};

inline bool valid_fingerprint_width(int n_bits) {
  return n_bits == 512 || n_bits == 1024 || n_bits == 2048 || n_bits == 4096;
}

/// Radius-0 environment identifier of an atom.
inline std::uint64_t atom_environment_seed(const Molecule &mol, std::uint32_t i) {
  const Atom &a = mol.atom(i);
  std::uint64_t h = hash_combine(0x5eed, a.element);
  h = hash_combine(h, static_cast<std::uint64_t>(a.charge + 16));
  h = hash_combine(h, static_cast<std::uint64_t>(a.hydrogens));
  h = hash_combine(h, mol.degree(i));
  return hash_combine(h, a.aromatic ? 1 : 0);
}

/// Per-atom environment identifiers for radii 0..radius (outer index radius).
inline std::vector<std::vector<std::uint64_t>> atom_environments(const Molecule &mol, int radius) {
  std::vector<std::vector<std::uint64_t>> layers;
  std::vector<std::uint64_t> ids(mol.size());
  for (std::uint32_t i = 0; i < mol.size(); ++i)
    ids[i] = atom_environment_seed(mol, i);
  layers.push_back(ids);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(mol.size());
    for (std::uint32_t i = 0; i < mol.size(); ++i) {
      env.clear();
      for (const Neighbor &nb : mol.neighbors(i))
        env.emplace_back(static_cast<std::uint64_t>(mol.bond(nb.bond).order), ids[nb.atom]);
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(static_cast<std::uint64_t>(r), ids[i]);
      for (const auto &[order, id] : env)
        h = hash_combine(hash_combine(h, order), id);
      next[i] = h;
    }
    ids = std::move(next);
    layers.push_back(ids);
  }
  return layers;
}

/// Morgan-style circular fingerprint: every atom environment at radii
/// 0..radius is hashed and folded modulo n_bits.
inline Fingerprint circular_fingerprint(const Molecule &mol, int radius, int n_bits) {
  if (radius < 0 || !valid_fingerprint_width(n_bits))
    throw Error(ErrorCode::InvalidParams, "radius must be >= 0 and n_bits one of 512/1024/2048/4096");
  Fingerprint fp(radius, n_bits);
  for (const auto &layer : atom_environments(mol, radius))
    for (std::uint64_t id : layer)
      fp.set(id % static_cast<std::uint64_t>(n_bits));
  return fp;
}

/// |a AND b| / |a OR b|, 1.0 when both are empty.
inline double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.n_bits() != b.n_bits())
    throw Error(ErrorCode::WidthMismatch, "fingerprint widths differ");
  std::size_t both = 0;
  std::size_t either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    either += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

} // namespace retrogate::chem

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "retrogate/chem/fingerprint.hpp"
#include "retrogate/chem/smiles.hpp"
#include "support.hpp"

using namespace retrogate;
using namespace retrogate::chem;

namespace {

const std::vector<std::string> kFixtures = {
    "CCO",
    "c1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "O=C(NCc1ccc(F)cc1)c1cc(Cl)ccn1",
    "CC(C)(C)OC(=O)N1CCC(CC1)Nc1ncccn1",
    "C[C@H](N)C(=O)O",
    "F/C=C/F",
    "[NH3+]CC([O-])=O",
    "c1ccc2[nH]ccc2c1",
    "O=[N+]([O-])c1ccc(Br)cc1",
    "CS(=O)(=O)N1CCN(CC1)c1ccc(cc1)B(O)O",
    "C1CC2CCC1CC2",
    "[2H]C([2H])([2H])Oc1ccc(cc1)C#N",
    "OC1=CC=CC=C1.Cl",
    "C1CCCCCCCCCC1",
    "FC(F)(F)c1cc(cc(c1)C(F)(F)F)C(=O)Cl",
    "[CH3:1][C:2](=[O:3])[OH:4].[OH:5][CH3:6]",
    "c1ccc(cc1)-c1ccccc1",
    "C12C3C4C1C5C2C3C45",
};

} // namespace

TEST(Smiles, ParsesSimpleChain) {
  Molecule m = parse_smiles("CCO");
  EXPECT_EQ(m.size(), 3u);
  ASSERT_EQ(m.bonds().size(), 2u);
  for (const Bond &b : m.bonds())
    EXPECT_EQ(b.order, BondOrder::Single);
  EXPECT_EQ(m.atom(0).hydrogens, 3);
  EXPECT_EQ(m.atom(1).hydrogens, 2);
  EXPECT_EQ(m.atom(2).hydrogens, 1);
}

TEST(Smiles, RingClosure) {
  Molecule m = parse_smiles("C1CC1");
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.bonds().size(), 3u);
  Molecule big = parse_smiles("C%12CC%12");
  EXPECT_EQ(big.bonds().size(), 3u);
}

TEST(Smiles, BracketAtomsWithMaps) {
  Molecule m = parse_smiles("[CH3:1][OH:2]");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.atom(0).map, 1);
  EXPECT_EQ(m.atom(1).map, 2);
  EXPECT_EQ(m.atom(0).hydrogens, 3);
  EXPECT_EQ(m.atom(1).hydrogens, 1);
}

TEST(Smiles, BracketChargeIsotopeAndStereo) {
  Molecule m = parse_smiles("[13CH2-][C@@H](F)[NH3+]");
  EXPECT_EQ(m.atom(0).isotope, 13);
  EXPECT_EQ(m.atom(0).charge, -1);
  EXPECT_EQ(m.atom(1).stereo, "@@");
  EXPECT_EQ(m.atom(1).hydrogens, 1);
  EXPECT_EQ(m.atom(3).charge, 1);
  EXPECT_EQ(parse_smiles("[O--]").atom(0).charge, -2);
}

TEST(Smiles, AromaticImplicitHydrogens) {
  Molecule benzene = parse_smiles("c1ccccc1");
  for (const Atom &a : benzene.atoms())
    EXPECT_EQ(a.hydrogens, 1);
  Molecule pyridine = parse_smiles("n1ccccc1");
  EXPECT_EQ(pyridine.atom(0).hydrogens, 0);
  Molecule thiophene = parse_smiles("s1cccc1");
  EXPECT_EQ(thiophene.atom(0).hydrogens, 0);
  EXPECT_EQ(benzene.bond(0).order, BondOrder::Aromatic);
}

TEST(Smiles, DotSeparatedFragments) {
  Molecule m = parse_smiles("CC.O");
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.components().size(), 2u);
}

TEST(SmilesErrors, UnbalancedBranchReportsOffset) {
  try {
    parse_smiles("C(C");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnbalancedBranch);
    EXPECT_EQ(e.offset(), 3u);
  }
  try {
    parse_smiles("CC)C");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnbalancedBranch);
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(SmilesErrors, Codes) {
  auto code_of = [](const char *s) {
    try {
      parse_smiles(s);
    } catch (const Error &e) {
      return std::make_pair(e.code(), e.offset().value_or(9999));
    }
    return std::make_pair(ErrorCode::Io, std::size_t{9999});
  };
  EXPECT_EQ(code_of(""), std::make_pair(ErrorCode::EmptyInput, std::size_t{0}));
  EXPECT_EQ(code_of("C1CC"), std::make_pair(ErrorCode::UnclosedRingBond, std::size_t{1}));
  EXPECT_EQ(code_of("CC[Xe]"), std::make_pair(ErrorCode::UnknownElement, std::size_t{3}));
  EXPECT_EQ(code_of("CX"), std::make_pair(ErrorCode::UnknownElement, std::size_t{1}));
  EXPECT_EQ(code_of("C[N+-]"), std::make_pair(ErrorCode::InvalidCharge, std::size_t{3}));
  EXPECT_EQ(code_of("[C+12]"), std::make_pair(ErrorCode::InvalidCharge, std::size_t{2}));
  EXPECT_EQ(code_of("C11"), std::make_pair(ErrorCode::InvalidBond, std::size_t{2}));
  EXPECT_EQ(code_of("C=").first, ErrorCode::InvalidBond);
  EXPECT_EQ(code_of("[CH3:1][CH3:1]").first, ErrorCode::DuplicateMapNumber);
}

TEST(Molecule, RejectsPentavalentCarbon) {
  try {
    parse_smiles("CC(C)(C)(C)C");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::ValenceExceeded);
    EXPECT_EQ(e.offset(), 1u);
  }
  std::vector<Atom> atoms(6);
  std::vector<Bond> bonds;
  for (std::uint32_t i = 1; i < 6; ++i)
    bonds.push_back({0, i, BondOrder::Single, 0});
  for (Atom &a : atoms)
    a.hydrogens = 0;
  EXPECT_THROW(Molecule(atoms, bonds), Error);
}

TEST(Molecule, ChargeAwareValence) {
  EXPECT_NO_THROW(parse_smiles("C[N+](C)(C)C"));
  EXPECT_NO_THROW(parse_smiles("CN(=O)=O"));
  EXPECT_THROW(parse_smiles("CN(C)(C)(C)(C)C"), Error);
  EXPECT_NO_THROW(parse_smiles("[O-]C"));
  EXPECT_THROW(parse_smiles("C[O-]C"), Error);
  EXPECT_NO_THROW(parse_smiles("CS(=O)(=O)C"));
}

TEST(Molecule, RejectsSelfLoopsAndDuplicateBonds) {
  std::vector<Atom> atoms(2);
  EXPECT_THROW(Molecule(atoms, {{0, 0, BondOrder::Single, 0}}), Error);
  EXPECT_THROW(Molecule(atoms, {{0, 1, BondOrder::Single, 0}, {1, 0, BondOrder::Single, 0}}), Error);
  EXPECT_THROW(Molecule(atoms, {{0, 2, BondOrder::Single, 0}}), Error);
}

TEST(Canonical, SameMoleculeDifferentOrder) {
  EXPECT_EQ(write_smiles(parse_smiles("OCC")), write_smiles(parse_smiles("CCO")));
  Molecule a = parse_smiles("CCO");
  Molecule b = parse_smiles("OCC");
  auto ra = canonical_rank(a);
  auto rb = canonical_rank(b);
  // Atom i of "CCO" is atom 2-i of "OCC".
  for (std::uint32_t i = 0; i < 3; ++i)
    EXPECT_EQ(ra[i], rb[2 - i]);
  EXPECT_EQ(canonical_rank(parse_smiles("C")), std::vector<std::uint32_t>{0});
}

TEST(Canonical, RanksArePermutation) {
  for (const auto &s : kFixtures) {
    auto r = canonical_rank(parse_smiles(s));
    std::vector<std::uint32_t> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < sorted.size(); ++i)
      EXPECT_EQ(sorted[i], i) << s;
  }
}

TEST(Canonical, InvariantUnderRandomPermutations) {
  std::mt19937_64 rng(7);
  for (const auto &s : kFixtures) {
    Molecule m = parse_smiles(s);
    const std::string reference = write_smiles(m);
    for (int k = 0; k < 100; ++k) {
      Molecule p = m.permuted(test_support::random_permutation(m.size(), rng));
      ASSERT_EQ(write_smiles(p), reference) << s;
    }
  }
}

TEST(Canonical, StereoDoesNotChangeRanks) {
  Molecule with = parse_smiles("C[C@H](N)C(=O)O");
  Molecule without = parse_smiles("CC(N)C(=O)O");
  EXPECT_EQ(canonical_rank(with), canonical_rank(without));
}

TEST(Canonical, MapNumbersCanBeIgnored) {
  EXPECT_EQ(canonical_smiles(parse_smiles("[CH3:5][CH2:1][OH:9]")), canonical_smiles(parse_smiles("OCC")));
  EXPECT_EQ(canonical_smiles(parse_smiles("[CH3:5][CH2:1][OH:9]")).find(':'), std::string::npos);
}

TEST(RoundTrip, ParseWriteParseIsIsomorphic) {
  for (const auto &s : kFixtures) {
    Molecule m = parse_smiles(s);
    for (bool canonical : {false, true}) {
      const std::string text = write_smiles(m, canonical);
      Molecule again = parse_smiles(text);
      EXPECT_TRUE(test_support::isomorphic(m, again)) << s << " -> " << text;
      // Opaque stereo marks survive.
      std::multiset<std::string> before, after;
      for (const Atom &a : m.atoms())
        before.insert(a.stereo);
      for (const Atom &a : again.atoms())
        after.insert(a.stereo);
      EXPECT_EQ(before, after) << s;
    }
  }
  Molecule benzene = parse_smiles("c1ccccc1");
  EXPECT_TRUE(test_support::isomorphic(benzene, parse_smiles(write_smiles(benzene))));
}

TEST(RoundTrip, CanonicalIsIdempotent) {
  for (const auto &s : kFixtures) {
    const std::string once = write_smiles(parse_smiles(s));
    EXPECT_EQ(write_smiles(parse_smiles(once)), once) << s;
  }
}

TEST(RoundTrip, OffsetsPointAtAtomTokens) {
  Molecule m = parse_smiles("[CH3:1]C(=O)Cl");
  SmilesOutput out = write_smiles_detailed(m, {false, true});
  EXPECT_EQ(out.text, "[CH3:1]C(=O)Cl");
  EXPECT_EQ(out.atom_offsets, (std::vector<std::size_t>{0, 7, 10, 12}));
}

TEST(Fingerprint, RadiusZeroSingleAtom) {
  Molecule m = parse_smiles("C");
  Fingerprint fp = circular_fingerprint(m, 0, 1024);
  EXPECT_EQ(fp.popcount(), 1u);
  EXPECT_TRUE(fp.test(atom_environment_seed(m, 0) % 1024));
}

TEST(Fingerprint, RenumberingInvariant) {
  EXPECT_EQ(circular_fingerprint(parse_smiles("CCO"), 2, 2048),
            circular_fingerprint(parse_smiles("OCC"), 2, 2048));
  std::mt19937_64 rng(11);
  for (const auto &s : kFixtures) {
    Molecule m = parse_smiles(s);
    Fingerprint ref = circular_fingerprint(m, 2, 1024);
    for (int k = 0; k < 10; ++k)
      EXPECT_EQ(circular_fingerprint(m.permuted(test_support::random_permutation(m.size(), rng)), 2, 1024), ref);
  }
}

TEST(Fingerprint, InvalidParams) {
  Molecule m = parse_smiles("CC");
  EXPECT_THROW(circular_fingerprint(m, -1, 1024), Error);
  EXPECT_THROW(circular_fingerprint(m, 2, 1000), Error);
}

TEST(Fingerprint, TanimotoEthanolVsEthylamine) {
  // Hand count: 9 environments each, shared are the two radius-0 carbons
  // and the radius-1 methyl, so 3 / 15.
  const double t = tanimoto(circular_fingerprint(parse_smiles("CCO"), 2, 2048),
                            circular_fingerprint(parse_smiles("CCN"), 2, 2048));
  EXPECT_GT(t, 0.0);
  EXPECT_LT(t, 1.0);
  EXPECT_DOUBLE_EQ(t, 0.2);
}

TEST(Fingerprint, TanimotoArithmetic) {
  Fingerprint a(0, 512), b(0, 512);
  // |a AND b| = 3, |a OR b| = 12
  for (int i = 0; i < 3; ++i) {
    a.set(i);
    b.set(i);
  }
  for (int i = 3; i < 8; ++i)
    a.set(i);
  for (int i = 8; i < 12; ++i)
    b.set(i);
  EXPECT_DOUBLE_EQ(tanimoto(a, b), 0.25);
  EXPECT_DOUBLE_EQ(tanimoto(a, a), 1.0);
  Fingerprint c(0, 512), d(0, 512);
  c.set(1);
  d.set(2);
  EXPECT_DOUBLE_EQ(tanimoto(c, d), 0.0);
  EXPECT_DOUBLE_EQ(tanimoto(Fingerprint(0, 512), Fingerprint(0, 512)), 1.0);
  EXPECT_THROW(tanimoto(Fingerprint(0, 512), Fingerprint(0, 1024)), Error);
  EXPECT_DOUBLE_EQ(tanimoto(a, b), tanimoto(b, a));
}

TEST(Fingerprint, Serialization) {
  Fingerprint fp = circular_fingerprint(parse_smiles("CC(=O)Oc1ccccc1C(=O)O"), 2, 512);
  const std::string text = fp.to_string();
  EXPECT_EQ(text.substr(0, 7), "r2b512:");
  EXPECT_EQ(text.size(), 7u + 128u);
  EXPECT_EQ(Fingerprint::from_string(text), fp);
  Fingerprint one(1, 512);
  one.set(0);
  one.set(9);
  EXPECT_EQ(one.to_string().substr(0, 14), "r1b512:0102000");
}

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "retrogate/reaction/apply.hpp"
#include "retrogate/reaction/library.hpp"
#include "retrogate/reaction/negatives.hpp"
#include "support.hpp"

using namespace retrogate;
using namespace retrogate::reaction;
using chem::parse_smiles;

namespace {

const char *kEster = "[CH3:1][C:2](=[O:3])[OH:4].[OH:5][CH3:6]>>[CH3:1][C:2](=[O:3])[O:5][CH3:6]";

const Corpus &corpus() {
  static const Corpus c = read_corpus(test_support::data_path("corpus_1k.rxn"));
  return c;
}

Reaction relabel_maps(const Reaction &rxn, std::mt19937_64 &rng) {
  int max_map = 0;
  for (const auto &m : rxn.reactants)
    for (const auto &a : m.atoms())
      max_map = std::max(max_map, a.map.value_or(0));
  for (const auto &a : rxn.product.atoms())
    max_map = std::max(max_map, a.map.value_or(0));
  auto perm = test_support::random_permutation(static_cast<std::size_t>(max_map) + 1, rng);
  auto apply = [&](const chem::Molecule &m) {
    std::vector<chem::Atom> atoms = m.atoms();
    for (auto &a : atoms)
      if (a.map)
        a.map = static_cast<int>(perm[static_cast<std::size_t>(*a.map)]) + 1;
    return chem::Molecule(std::move(atoms), m.bonds());
  };
  Reaction out = rxn;
  for (auto &m : out.reactants)
    m = apply(m);
  out.product = apply(rxn.product);
  return out;
}

std::vector<int> maps_of(const Reaction &rxn, const std::vector<AtomRef> &refs) {
  const MapIndex index(rxn);
  std::vector<int> out;
  for (const AtomRef &r : refs)
    out.push_back(index.atom(r).map.value_or(-1) * 2 + static_cast<int>(r.side));
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST(Reaction, ParsesMappedReaction) {
  Reaction r = parse_reaction(kEster);
  ASSERT_EQ(r.reactants.size(), 2u);
  EXPECT_EQ(r.product.size(), 5u);
  EXPECT_EQ(canonical_reaction_key(r), 
            canonical_reaction_key(parse_reaction("[OH:1][CH3:2].[CH3:3][C:4]([OH:5])=[O:6]>>[CH3:2][O:1][C:4]([CH3:3])=[O:6]")));
  EXPECT_EQ(canonical_reaction_key(r).find(':'), std::string::npos);
}

TEST(Reaction, Validation) {
  EXPECT_THROW(parse_reaction("[CH4:1].[OH2:1]>>[CH4:1]"), Error);
  try {
    parse_reaction("CC>>CC");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMappedAtoms);
  }
  try {
    parse_reaction("CC>>C(C");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnbalancedBranch);
    EXPECT_EQ(e.offset(), 7u);
  }
  EXPECT_THROW(parse_reaction("CCO"), Error);
}

TEST(Reaction, CorpusLoads) {
  EXPECT_EQ(corpus().reactions.size(), 1000u);
  EXPECT_TRUE(corpus().issues.empty());
  std::istringstream in("CCO>>CC\n[CH3:1][OH:2]>>[CH3:1][OH:2]\tok\tclass\nnot a reaction\n");
  Corpus c = parse_corpus(in);
  ASSERT_EQ(c.reactions.size(), 1u);
  EXPECT_EQ(c.reactions[0].id, "ok");
  ASSERT_EQ(c.issues.size(), 2u);
  EXPECT_EQ(c.issues[0].line, 1u);
  EXPECT_EQ(c.issues[1].line, 3u);
}

TEST(Center, IdentityReactionIsEmpty) {
  EXPECT_TRUE(reaction_center(parse_reaction("[CH3:1][OH:2]>>[CH3:1][OH:2]")).empty());
}

TEST(Center, Esterification) {
  Reaction r = parse_reaction(kEster);
  // Reactant side: carbonyl C (map 2), leaving O (4), alcohol O (5);
  // product side: carbonyl C and the ester O.
  EXPECT_EQ(maps_of(r, reaction_center(r)),
            (std::vector<int>{2 * 2, 2 * 2 + 1, 4 * 2, 5 * 2, 5 * 2 + 1}));
  EXPECT_EQ(reaction_center(r), test_support::oracle_center(r));
}

TEST(Center, UnmappedReactionRejected) {
  Reaction r;
  r.reactants = {parse_smiles("CC")};
  r.product = parse_smiles("CC");
  EXPECT_THROW(reaction_center(r), Error);
}

TEST(Center, MatchesOracleOnCorpus) {
  for (const Reaction &r : corpus().reactions)
    ASSERT_EQ(reaction_center(r), test_support::oracle_center(r)) << r.id;
}

TEST(Center, InvariantUnderMapRelabelling) {
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < corpus().reactions.size(); i += 37) {
    const Reaction &r = corpus().reactions[i];
    EXPECT_EQ(reaction_center(relabel_maps(r, rng)), reaction_center(r)) << r.id;
  }
}

TEST(Template, RadiusZeroHoldsOnlyCenterAtoms) {
  Reaction r = parse_reaction(kEster);
  ReactionTemplate t = extract_template(r, 0);
  EXPECT_EQ(t.product.size(), 2u);
  EXPECT_EQ(t.reactants.size(), 3u);
  for (const auto &a : t.product.atoms())
    EXPECT_TRUE(a.center);
  for (const auto &a : t.reactants.atoms())
    EXPECT_TRUE(a.center);
}

TEST(Template, SameChemistrySameTemplate) {
  Reaction a = parse_reaction("[OH:1][C:2](=[O:3])[c:4]1[cH:5][cH:6][cH:7][cH:8][cH:9]1.[OH:10][CH2:11][CH3:12]>>"
                              "[O:10]([CH2:11][CH3:12])[C:2](=[O:3])[c:4]1[cH:5][cH:6][cH:7][cH:8][cH:9]1");
  Reaction b = parse_reaction("[CH3:1][OH:2].[Cl:20][c:11]1[cH:12][cH:13][c:14]([cH:15][cH:16]1)[C:17]([OH:18])=[O:19]>>"
                              "[Cl:20][c:11]1[cH:12][cH:13][c:14]([cH:15][cH:16]1)[C:17](=[O:19])[O:2][CH3:1]");
  EXPECT_EQ(extract_template(a, 1).text, extract_template(b, 1).text);
  EXPECT_NE(extract_template(a, 2).text, extract_template(b, 2).text);
}

TEST(Template, LargeRadiusCoversWholeReaction) {
  const Reaction &r = corpus().reactions.front();
  ReactionTemplate t = extract_template(r, 50);
  EXPECT_EQ(t.product.size(), r.product.size());
  std::size_t n = 0;
  for (const auto &m : r.reactants)
    n += m.size();
  EXPECT_EQ(t.reactants.size(), n);
  EXPECT_EQ(t.product.bonds().size(), r.product.bonds().size());
}

TEST(Template, TextRoundTrip) {
  for (std::size_t i = 0; i < corpus().reactions.size(); i += 13) {
    ReactionTemplate t = extract_template(corpus().reactions[i], 1);
    EXPECT_EQ(template_text(t.product, t.reactants), t.text);
    ReactionTemplate again = parse_template(t.text);
    EXPECT_EQ(again.product.atoms(), t.product.atoms());
    EXPECT_EQ(again.reactants.atoms(), t.reactants.atoms());
  }
  EXPECT_THROW(parse_template("[C:1]>>CC"), Error);
  EXPECT_THROW(parse_template("[CH3:1]>>[C:1]"), Error);
  EXPECT_THROW(parse_template("[CH3;D1:1]"), Error);
}

TEST(Template, CanonicalUnderRenumbering) {
  std::mt19937_64 rng(5);
  for (std::size_t i = 0; i < corpus().reactions.size(); i += 41) {
    const Reaction &r = corpus().reactions[i];
    Reaction shuffled = relabel_maps(r, rng);
    for (auto &m : shuffled.reactants)
      m = m.permuted(test_support::random_permutation(m.size(), rng));
    shuffled.product = shuffled.product.permuted(test_support::random_permutation(r.product.size(), rng));
    std::reverse(shuffled.reactants.begin(), shuffled.reactants.end());
    EXPECT_EQ(extract_template(shuffled, 1).text, extract_template(r, 1).text) << r.id;
  }
}

TEST(Apply, RetroRoundTripOnCorpus) {
  std::size_t extracted = 0, recovered = 0;
  for (const Reaction &r : corpus().reactions) {
    ReactionTemplate t;
    try {
      t = extract_template(r, 1);
    } catch (const Error &) {
      continue;
    }
    ++extracted;
    const std::string want = side_key(r.reactants);
    for (const RetroOutcome &o : apply_template_retro(t, r.product))
      if (o.key == want) {
        ++recovered;
        break;
      }
  }
  const double rate = static_cast<double>(recovered) / static_cast<double>(extracted);
  std::cout << "retro round-trip: " << recovered << "/" << extracted << " = " << rate << "\n";
  EXPECT_EQ(extracted, corpus().reactions.size());
  EXPECT_GE(rate, 0.9);
}

TEST(Apply, AbsentPatternGivesNothing) {
  ReactionTemplate t = extract_template(parse_reaction(kEster), 1);
  EXPECT_TRUE(apply_template_retro(t, parse_smiles("c1ccccc1")).empty());
  EXPECT_TRUE(apply_template_forward(t, {parse_smiles("CCN"), parse_smiles("CCCl")}).empty());
}

TEST(Apply, SymmetricProductHasTwoEmbeddings) {
  const ReactionTemplate t =
      parse_template("[CH0;D3:1](=[O:2])-[OH1;D1:3]>>[CH0;D3:1](=[O:2])-[OH0;D2:3]-[CH3;D1:4]");
  const chem::Molecule diacid = parse_smiles("OC(=O)c1ccc(cc1)C(=O)O");
  // Brute force: every carboxyl carbon is one site.
  std::size_t sites = 0;
  for (std::uint32_t i = 0; i < diacid.size(); ++i) {
    if (diacid.atom(i).element != 6 || diacid.atom(i).aromatic)
      continue;
    int double_o = 0, hydroxyl = 0;
    for (const auto &nb : diacid.neighbors(i)) {
      const auto &o = diacid.atom(nb.atom);
      if (o.element != 8)
        continue;
      if (diacid.bond(nb.bond).order == chem::BondOrder::Double)
        ++double_o;
      else if (o.hydrogens == 1)
        ++hydroxyl;
    }
    sites += double_o == 1 && hydroxyl == 1;
  }
  EXPECT_EQ(sites, 2u);
  EXPECT_EQ(find_embeddings(t.product, diacid).size(), sites);
  ApplyOptions keep;
  keep.deduplicate = false;
  EXPECT_EQ(apply_template_retro(t, diacid, keep).size(), 2u);
  auto dedup = apply_template_retro(t, diacid);
  ASSERT_EQ(dedup.size(), 1u);
  EXPECT_EQ(dedup[0].key, chem::canonical_smiles(parse_smiles("COC(=O)c1ccc(cc1)C(=O)O")));
}

TEST(Apply, ForwardEsterification) {
  ReactionTemplate t = extract_template(parse_reaction(kEster), 0);
  auto out = apply_template_forward(t, {parse_smiles("CC(=O)O"), parse_smiles("OC")});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].key, chem::canonical_smiles(parse_smiles("COC(C)=O")));
  EXPECT_EQ(out[0].sources, (std::vector<std::uint32_t>{0, 1}));

  // Two different hydroxyls give two esters; a symmetric diol gives one.
  auto two = apply_template_forward(t, {parse_smiles("CC(=O)O"), parse_smiles("OCCC(C)O")});
  std::set<std::string> products;
  for (const auto &o : two)
    if (o.sources.size() == 2)
      products.insert(o.key);
  EXPECT_EQ(products.size(), 2u);
  auto sym = apply_template_forward(t, {parse_smiles("CC(=O)O"), parse_smiles("OCCCO")});
  products.clear();
  for (const auto &o : sym)
    if (o.sources.size() == 2)
      products.insert(o.key);
  EXPECT_EQ(products.size(), 1u);
}

TEST(Apply, ForwardInvertsRetroOnCorpus) {
  std::size_t ok = 0, total = 0;
  for (std::size_t i = 0; i < corpus().reactions.size(); i += 7) {
    const Reaction &r = corpus().reactions[i];
    ReactionTemplate t = extract_template(r, 1);
    ++total;
    const std::string want = chem::canonical_smiles(r.product);
    for (const auto &o : apply_template_forward(t, r.reactants))
      if (o.key == want) {
        ++ok;
        break;
      }
  }
  EXPECT_EQ(ok, total);
}

TEST(Library, ExtractionCountsAndFileRoundTrip) {
  ExtractionResult r1 = extract_templates(corpus().reactions, 1);
  ExtractionResult r0 = extract_templates(corpus().reactions, 0);
  EXPECT_TRUE(r1.failures.empty());
  EXPECT_NE(r0.library.size(), r1.library.size());
  EXPECT_LT(r0.library.size(), r1.library.size());
  EXPECT_EQ(r1.library.total_popularity(), corpus().reactions.size());
  for (std::size_t i = 1; i < r1.library.size(); ++i)
    EXPECT_GE(r1.library[i - 1].popularity, r1.library[i].popularity);
  std::stringstream buf;
  r1.library.write(buf);
  TemplateLibrary again = TemplateLibrary::read(buf);
  ASSERT_EQ(again.size(), r1.library.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    EXPECT_EQ(again[i].text, r1.library[i].text);
    EXPECT_EQ(again[i].popularity, r1.library[i].popularity);
  }
  EXPECT_TRUE(extract_templates({}, 1).library.empty());
  std::stringstream again_buf;
  extract_templates(corpus().reactions, 1).library.write(again_buf);
  std::stringstream first_buf;
  r1.library.write(first_buf);
  EXPECT_EQ(first_buf.str(), again_buf.str());
}

TEST(Negatives, RecordedTemplateOnSingleSiteIsFiltered) {
  Reaction r = parse_reaction(kEster);
  r.id = "pos";
  TemplateLibrary lib({extract_template(r, 1)});
  NegativeOptions opts;
  opts.count = 1;
  opts.attempts_per_negative = 20;
  try {
    generate_negatives({r}, lib, opts);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientMatches);
  }
}

TEST(Negatives, DeterministicAndDisjointFromPositives) {
  const TemplateLibrary lib = extract_templates(corpus().reactions, 1).library;
  std::set<std::string> positives;
  for (const Reaction &r : corpus().reactions)
    positives.insert(canonical_reaction_key(r));
  for (NegativeMode mode : {NegativeMode::Forward, NegativeMode::Retro2}) {
    NegativeOptions opts;
    opts.mode = mode;
    opts.count = 100;
    opts.seed = 42;
    auto a = generate_negatives(corpus().reactions, lib, opts);
    auto b = generate_negatives(corpus().reactions, lib, opts);
    ASSERT_EQ(a.size(), 100u);
    std::set<std::string> keys;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(reaction_smiles(a[i]), reaction_smiles(b[i]));
      const std::string key = canonical_reaction_key(a[i]);
      EXPECT_FALSE(positives.count(key)) << key;
      EXPECT_TRUE(keys.insert(key).second);
      EXPECT_NO_THROW(validate(a[i]));
    }
  }
}

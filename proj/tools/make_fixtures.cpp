// Generates the synthetic, fully atom-mapped reaction corpus and the
// building-block stock used by the test suite. Reactions come from a fixed
// set of forward rules applied to drug-like building blocks, seeded, so the
// output is reproducible.
//
// A second family of search targets is composed forward from the stock with
// templates extracted from that corpus, 1 to 4 steps deep; every step is
// checked to be among the baseline generator's candidates for its product.
//
// usage: make_fixtures <output-dir>

#include <algorithm>
#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "retrogate/reaction/apply.hpp"
#include "retrogate/reaction/library.hpp"
#include "retrogate/search/generator.hpp"

using namespace retrogate;
using namespace retrogate::reaction;
using chem::Molecule;

namespace {

using Blocks = std::vector<std::string>;

const Blocks kAcids = {
    "OC(=O)c1ccccc1", "OC(=O)c1ccc(F)cc1", "OC(=O)c1ccc(Cl)cc1", "OC(=O)c1ccncc1",
    "OC(=O)c1cccs1", "OC(=O)CC1CCCC1", "OC(=O)C1CCOCC1", "CC(C)C(=O)O", "OC(=O)Cc1ccccc1",
    "COc1ccc(cc1)C(=O)O", "Cc1cc(C(=O)O)no1", "OC(=O)c1ccc2ccccc2c1", "OC(=O)C1CC1",
    "OC(=O)c1cnccn1", "OC(=O)c1ccc(cc1)C#N", "OC(=O)CCc1ccccc1", "OC(=O)c1ccc(Br)cc1",
    "CC(C)(C)C(=O)O", "OC(=O)c1ccc(cc1)[N+](=O)[O-]", "CC(C)(C)OC(=O)N1CCC(CC1)C(=O)O",
    "COC(=O)CCC(=O)O", "CC(=O)c1ccc(cc1)C(=O)O", "OC(=O)c1cccc(c1)[N+](=O)[O-]",
    "CC(C)(C)OC(=O)NCC(=O)O", "OC(=O)c1ccc(O)cc1", "OC(=O)c1ccc(CBr)cc1",
    "COC(=O)c1ccc(cc1)C(=O)O", "OC(=O)c1ccc(C=O)cc1"};

const Blocks kAlcohols = {"OCC", "OCCC", "CC(C)O", "OCc1ccccc1", "OCC1CC1", "OCCOC",
                          "OC1CCCC1", "OCCN1CCOCC1", "OCC(F)(F)F", "OCCc1ccccc1", "OC1CCOC1",
                          "OCCCCO", "NCCO", "OCc1ccc(cc1)[N+](=O)[O-]", "OCC1CCN(CC1)C(=O)OC(C)(C)C",
                          "OCc1ccc(Br)cc1", "OCCNC(=O)OC(C)(C)C", "OCc1ccc(cc1)C(=O)OC"};

const Blocks kPrimaryAmines = {
    "NCc1ccccc1", "NC1CC1", "NCC(C)C", "NCCc1ccccc1", "NC1CCCCC1", "NCc1ccco1", "NCCOC",
    "NC(C)c1ccccc1", "Nc1ccccc1", "Nc1ccc(F)cc1", "NCC1CCOCC1", "NCCN1CCCC1", "NCCO",
    "NCc1ccncc1", "CC(C)(C)OC(=O)NCCN", "CC(C)(C)OC(=O)N1CCC(N)CC1", "COC(=O)c1ccc(N)cc1",
    "NCc1ccc(cc1)[N+](=O)[O-]", "CC(=O)c1ccc(N)cc1", "Nc1ccc(cc1)[N+](=O)[O-]",
    "NCc1ccc(Br)cc1", "Nc1ccc(O)cc1", "NCCCO", "Nc1ccc(Br)cc1", "NCC1CCNCC1", "COC(=O)CN"};

const Blocks kSecondaryAmines = {
    "C1CCNCC1", "C1COCCN1", "CN1CCNCC1", "CNC", "C1CCNC1", "CNCc1ccccc1", "OC1CCNCC1",
    "CC1CCNCC1", "CC(C)(C)OC(=O)N1CCNCC1", "CC(C)(C)OC(=O)NC1CCNCC1", "COC(=O)C1CCNCC1",
    "O=[N+]([O-])c1ccc(cc1)N1CCNCC1", "CNCCO", "Brc1ccc(cc1)C1CCNCC1", "CNCCc1ccc(O)cc1"};

const Blocks kAlkylBromides = {
    "BrCc1ccccc1", "BrCCC", "BrCC1CC1", "BrCc1ccc(F)cc1", "BrCCOC", "BrCC(=O)OCC",
    "BrCCc1ccccc1", "BrCc1ccccn1", "BrCC#N", "BrCc1ccc(cc1)C#N", "CC(C)(C)OC(=O)N1CCC(CBr)CC1",
    "COC(=O)c1ccc(CBr)cc1", "O=[N+]([O-])c1ccc(CBr)cc1", "BrCCCOc1ccccc1"};

const Blocks kArylBromides = {
    "Brc1ccccc1", "Brc1ccc(F)cc1", "Brc1ccncc1", "Brc1cccnc1", "Brc1ccc(cc1)C#N",
    "COc1ccc(Br)cc1", "Brc1ccc2c(c1)OCO2", "O=[N+]([O-])c1ccc(Br)cc1", "Brc1cccs1",
    "COC(=O)c1ccc(Br)cc1", "CC(=O)c1ccc(Br)cc1", "Cc1ccc(Br)cc1", "CC(C)(C)OC(=O)Nc1ccc(Br)cc1",
    "Brc1cnc2ccccc2c1", "Oc1ccc(Br)cc1", "OCc1ccc(Br)cc1", "O=Cc1ccc(Br)cc1"};

const Blocks kBoronicAcids = {
    "OB(O)c1ccccc1", "OB(O)c1ccc(F)cc1", "Cc1ccc(cc1)B(O)O", "OB(O)c1cccnc1",
    "COc1ccc(cc1)B(O)O", "OB(O)c1ccco1", "COC(=O)c1ccc(cc1)B(O)O", "OB(O)c1ccc(Cl)cc1",
    "OB(O)c1cccc(c1)C#N", "COc1ccc(cc1OC)B(O)O", "CC(=O)c1ccc(cc1)B(O)O",
    "OB(O)c1ccc(cc1)[N+](=O)[O-]", "OB(O)c1ccc(O)cc1", "OB(O)c1ccc(CO)cc1"};

const Blocks kPhenols = {"Oc1ccccc1", "Oc1ccc(F)cc1", "Oc1ccc(Cl)cc1", "Oc1ccc(cc1)C#N",
                         "Oc1cccnc1", "COc1ccc(O)cc1", "Oc1ccc2ccccc2c1", "Cc1ccc(O)cc1",
                         "COC(=O)c1ccc(O)cc1", "Oc1ccc(cc1)[N+](=O)[O-]", "CC(=O)c1ccc(O)cc1",
                         "Oc1ccc(CO)cc1", "Oc1ccc(C=O)cc1"};

const Blocks kAldehydes = {"O=Cc1ccccc1", "O=Cc1ccc(F)cc1", "O=Cc1ccncc1", "O=CC1CCCCC1",
                           "O=Cc1ccco1", "O=Cc1cccs1", "CC(C)C=O", "COc1ccc(C=O)cc1",
                           "O=Cc1ccc(cc1)C#N", "O=CCc1ccccc1", "COC(=O)c1ccc(C=O)cc1",
                           "CC(C)(C)OC(=O)N1CCC(C=O)CC1", "O=Cc1ccc(cc1)[N+](=O)[O-]"};

const Blocks kSulfonylChlorides = {"ClS(=O)(=O)c1ccccc1", "Cc1ccc(cc1)S(Cl)(=O)=O",
                                   "CS(Cl)(=O)=O", "ClS(=O)(=O)c1ccc(F)cc1",
                                   "ClS(=O)(=O)c1cccs1", "CCS(Cl)(=O)=O",
                                   "ClS(=O)(=O)c1ccc(cc1)C#N",
                                   "O=[N+]([O-])c1ccc(cc1)S(Cl)(=O)=O"};

const Blocks kAcidChlorides = {"ClC(=O)c1ccccc1", "CC(Cl)=O", "ClC(=O)c1ccc(F)cc1",
                               "ClC(=O)C1CC1", "ClC(=O)c1ccco1", "CC(C)C(Cl)=O",
                               "ClC(=O)c1ccncc1", "ClC(=O)COc1ccccc1",
                               "O=[N+]([O-])c1ccc(cc1)C(Cl)=O", "COC(=O)CCC(Cl)=O"};

const Blocks kIsocyanates = {"O=C=Nc1ccccc1", "O=C=Nc1ccc(F)cc1", "O=C=NC1CCCCC1",
                             "CC(C)N=C=O", "O=C=NCc1ccccc1", "O=C=Nc1ccc(Cl)cc1",
                             "COc1ccc(cc1)N=C=O", "O=C=Nc1ccc(cc1)[N+](=O)[O-]"};

const Blocks kKetones = {"CC(=O)c1ccccc1", "O=C1CCCCC1", "CC(=O)c1ccc(F)cc1",
                         "O=C1CCN(CC1)C(=O)OC(C)(C)C", "CC(=O)CCc1ccccc1", "O=C1CCOCC1",
                         "CC(=O)c1ccncc1", "CCC(=O)c1ccccc1", "O=C(C1CC1)c1ccccc1",
                         "CC(=O)c1ccc(Br)cc1", "CC(=O)c1ccc(O)cc1"};

const Blocks kMethylEsters = {"COC(=O)c1ccccc1", "COC(=O)Cc1ccccc1", "COC(=O)c1ccncc1",
                              "COC(=O)c1cccc(c1)[N+](=O)[O-]", "COC(=O)C1CCN(CC1)C(=O)OC(C)(C)C"};

const Blocks kNitroArenes = {"[O-][N+](=O)c1ccccc1", "[O-][N+](=O)c1ccc(F)cc1",
                             "Cc1ccc(cc1)[N+](=O)[O-]", "[O-][N+](=O)c1ccc(Cl)cc1",
                             "COc1ccc(cc1)[N+](=O)[O-]", "[O-][N+](=O)c1cccnc1"};

Blocks concat(std::initializer_list<const Blocks *> lists) {
  Blocks out;
  for (const Blocks *l : lists)
    out.insert(out.end(), l->begin(), l->end());
  return out;
}

// Forward rules, written product>>reactants.
struct Rule {
  std::string name;
  std::vector<std::string> templates;
  std::vector<Blocks> roles; // one list per reactant; empty = unimolecular pool
  std::size_t quota;
};

std::vector<Rule> make_rules() {
  const Blocks amines = concat({&kPrimaryAmines, &kSecondaryAmines});
  return {
      {"esterification",
       {"[CH0;D3:1](=[O:2])-[OH0;D2:4]-[C:5]>>[CH0;D3:1](=[O:2])-[OH1;D1:3].[OH1;D1:4]-[C:5]"},
       {kAcids, kAlcohols},
       40},
      {"amide_coupling",
       {"[CH0;D3:1](=[O:2])-[NH1;D2:4]>>[CH0;D3:1](=[O:2])-[OH1;D1:3].[NH2;D1:4]",
        "[CH0;D3:1](=[O:2])-[NH0;D3:4]>>[CH0;D3:1](=[O:2])-[OH1;D1:3].[NH1;D2:4]"},
       {kAcids, amines},
       45},
      {"n_alkylation",
       {"[CH2;D2:1]-[NH1;D2:3]>>[CH2;D2:1]-[BrH0;D1:2].[NH2;D1:3]",
        "[CH2;D2:1]-[NH0;D3:3]>>[CH2;D2:1]-[BrH0;D1:2].[NH1;D2:3]"},
       {kAlkylBromides, amines},
       40},
      {"aryl_amination",
       {"[cH0;D3:1]-[NH1;D2:3]>>[cH0;D3:1]-[BrH0;D1:2].[NH2;D1:3]",
        "[cH0;D3:1]-[NH0;D3:3]>>[cH0;D3:1]-[BrH0;D1:2].[NH1;D2:3]"},
       {kArylBromides, amines},
       40},
      {"suzuki_coupling",
       {"[cH0;D3:1]-[cH0;D3:3]>>[cH0;D3:1]-[BrH0;D1:2].[cH0;D3:3]-[BH0;D3:4](-[OH1;D1:5])-[OH1;D1:6]"},
       {kArylBromides, kBoronicAcids},
       45},
      {"williamson_ether",
       {"[c:5]-[OH0;D2:1]-[CH2;D2:3]>>[OH1;D1:1]-[c:5].[CH2;D2:3]-[BrH0;D1:4]"},
       {kPhenols, kAlkylBromides},
       40},
      {"reductive_amination",
       {"[CH2;D2:1]-[NH1;D2:3]>>[CH1;D2:1]=[OH0;D1:2].[NH2;D1:3]",
        "[CH2;D2:1]-[NH0;D3:3]>>[CH1;D2:1]=[OH0;D1:2].[NH1;D2:3]"},
       {kAldehydes, amines},
       40},
      {"sulfonamide_formation",
       {"[SH0;D4:1]-[NH1;D2:3]>>[SH0;D4:1]-[ClH0;D1:2].[NH2;D1:3]",
        "[SH0;D4:1]-[NH0;D3:3]>>[SH0;D4:1]-[ClH0;D1:2].[NH1;D2:3]"},
       {kSulfonylChlorides, amines},
       40},
      {"acyl_chloride_amidation",
       {"[CH0;D3:1](=[O:2])-[NH1;D2:4]>>[CH0;D3:1](=[O:2])-[ClH0;D1:3].[NH2;D1:4]",
        "[CH0;D3:1](=[O:2])-[NH0;D3:4]>>[CH0;D3:1](=[O:2])-[ClH0;D1:3].[NH1;D2:4]"},
       {kAcidChlorides, amines},
       40},
      {"urea_formation",
       {"[NH1;D2:1]-[CH0;D3:2](=[O:3])-[NH1;D2:4]>>[NH0;D2:1]=[CH0;D2:2]=[O:3].[NH2;D1:4]",
        "[NH1;D2:1]-[CH0;D3:2](=[O:3])-[NH0;D3:4]>>[NH0;D2:1]=[CH0;D2:2]=[O:3].[NH1;D2:4]"},
       {kIsocyanates, amines},
       35},
      {"boc_deprotection",
       {"[NH2;D1:1]>>[NH1;D2:1]-[CH0;D3:2](=[OH0;D1:3])-[OH0;D2:4]-[CH0;D4:5](-[CH3;D1:6])(-[CH3;D1:7])-[CH3;D1:8]",
        "[NH1;D2:1]>>[NH0;D3:1]-[CH0;D3:2](=[OH0;D1:3])-[OH0;D2:4]-[CH0;D4:5](-[CH3;D1:6])(-[CH3;D1:7])-[CH3;D1:8]"},
       {},
       70},
      {"ester_hydrolysis",
       {"[CH0;D3:1](=[O:2])-[OH1;D1:3]>>[CH0;D3:1](=[O:2])-[OH0;D2:3]-[CH3;D1:4]"},
       {},
       60},
      {"nitro_reduction",
       {"[c:4]-[NH2;D1:1]>>[c:4]-[NH0+;D3:1](=[OH0;D1:2])-[OH0-;D1:3]"},
       {},
       60},
      {"ketone_reduction",
       {"[C:3]-[CH1;D3:1](-[C:4])-[OH1;D1:2]>>[C:3]-[CH0;D3:1](-[C:4])=[OH0;D1:2]",
        "[c:3]-[CH1;D3:1](-[C:4])-[OH1;D1:2]>>[c:3]-[CH0;D3:1](-[C:4])=[OH0;D1:2]"},
       {},
       45},
  };
}

// Reactant-side pattern of each role, one per template of the rule.
std::vector<std::vector<PatternGraph>> role_patterns(const Rule &rule) {
  std::vector<std::vector<PatternGraph>> out(rule.roles.size());
  for (const std::string &text : rule.templates) {
    const std::string reactants = text.substr(text.find(">>") + 2);
    std::size_t start = 0;
    for (auto &role : out) {
      const std::size_t dot = reactants.find('.', start);
      role.push_back(detail::parse_pattern(reactants.substr(start, dot - start), 0));
      start = dot + 1;
    }
  }
  return out;
}

// Maps every atom of the reactants 1..N in order.
std::vector<Molecule> map_reactants(const std::vector<Molecule> &mols) {
  std::vector<Molecule> out;
  int next = 1;
  for (const Molecule &m : mols) {
    std::vector<chem::Atom> atoms = m.atoms();
    for (auto &a : atoms)
      a.map = next++;
    out.emplace_back(std::move(atoms), m.bonds());
  }
  return out;
}

struct Generator {
  std::mt19937_64 rng{20240611};
  std::vector<Reaction> corpus;
  std::set<std::string> keys;
  std::vector<Molecule> products; // unmapped products, pool for unimolecular rules

  // Tries to add one reaction for the given rule and reactants.
  bool attempt(const Rule &rule, const std::vector<Molecule> &inputs) {
    const std::vector<Molecule> mapped = map_reactants(inputs);
    std::vector<ForwardOutcome> outcomes;
    for (const std::string &text : rule.templates) {
      const ReactionTemplate t = parse_template(text);
      for (ForwardOutcome &o : apply_template_forward(t, mapped))
        if (o.sources.size() == inputs.size())
          outcomes.push_back(std::move(o));
    }
    if (outcomes.empty())
      return false;
    ForwardOutcome &pick = outcomes[draw_below(rng, outcomes.size())];
    Reaction rxn;
    rxn.reactants = mapped;
    rxn.product = pick.product;
    rxn.reaction_class = rule.name;
    try {
      validate(rxn);
    } catch (const Error &) {
      return false;
    }
    if (!keys.insert(canonical_reaction_key(rxn)).second)
      return false;
    char id[16];
    std::snprintf(id, sizeof id, "R%04zu", corpus.size() + 1);
    rxn.id = id;
    products.push_back(rxn.product.without_maps());
    corpus.push_back(std::move(rxn));
    return true;
  }

  // Reactions where one reactant is an earlier product, so that the corpus
  // contains multi-step chemistry.
  std::size_t run_extension(const Rule &rule, std::size_t quota) {
    const auto patterns = role_patterns(rule);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> combos; // role, product, block
    for (std::size_t role = 0; role < 2; ++role)
      for (std::size_t p = 0; p < products.size(); ++p) {
        const bool fits = std::any_of(patterns[role].begin(), patterns[role].end(), [&](const PatternGraph &g) {
          return !find_embeddings(g, products[p], 1).empty();
        });
        if (fits)
          for (std::size_t b = 0; b < rule.roles[1 - role].size(); ++b)
            combos.emplace_back(role, p, b);
      }
    shuffle(combos);
    std::size_t made = 0;
    for (auto [role, p, b] : combos) {
      if (made == quota)
        break;
      Molecule block = chem::parse_smiles(rule.roles[1 - role][b]);
      std::vector<Molecule> inputs = role == 0 ? std::vector<Molecule>{products[p], block}
                                               : std::vector<Molecule>{block, products[p]};
      if (attempt(rule, inputs))
        ++made;
    }
    return made;
  }

  template <class T> void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[draw_below(rng, i)]);
  }

  std::size_t run_bimolecular(const Rule &rule, std::size_t quota) {
    std::vector<std::pair<std::size_t, std::size_t>> combos;
    for (std::size_t a = 0; a < rule.roles[0].size(); ++a)
      for (std::size_t b = 0; b < rule.roles[1].size(); ++b)
        combos.emplace_back(a, b);
    shuffle(combos);
    std::size_t made = 0;
    for (auto [a, b] : combos) {
      if (made == quota)
        break;
      if (attempt(rule, {chem::parse_smiles(rule.roles[0][a]), chem::parse_smiles(rule.roles[1][b])}))
        ++made;
    }
    return made;
  }

  std::size_t run_unimolecular(const Rule &rule, const std::vector<Molecule> &pool, std::size_t quota) {
    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = i;
    shuffle(order);
    std::size_t made = 0;
    for (std::size_t i : order) {
      if (made == quota)
        break;
      if (attempt(rule, {pool[i]}))
        ++made;
    }
    return made;
  }
};

struct SearchTarget {
  std::string smiles;
  std::size_t depth = 0;
  std::vector<std::string> steps; // map-free "reactants>>product", leaves first
};

// Reactant-side component patterns of a library template.
std::vector<PatternGraph> component_patterns(const ReactionTemplate &t) {
  const std::string reactants = t.text.substr(t.text.find(">>") + 2);
  std::vector<PatternGraph> out;
  std::size_t start = 0;
  while (start <= reactants.size()) {
    const std::size_t dot = reactants.find('.', start);
    out.push_back(detail::parse_pattern(reactants.substr(start, dot - start), 0));
    if (dot == std::string::npos)
      break;
    start = dot + 1;
  }
  return out;
}

std::string set_key(std::vector<Molecule> mols) {
  std::vector<std::string> parts;
  for (const Molecule &m : mols)
    parts.push_back(chem::canonical_smiles(m.without_maps()));
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i)
    key += (i ? "." : "") + parts[i];
  return key;
}

std::vector<SearchTarget> make_search_targets(const std::vector<Reaction> &corpus, const std::vector<Molecule> &stock,
                                              const std::vector<std::size_t> &per_depth) {
  std::mt19937_64 rng(7);
  const TemplateLibrary lib = extract_templates(corpus, 1).library;
  const search::TemplateGenerator gen(lib);
  std::set<std::string> stock_keys, taken;
  for (const Molecule &m : stock)
    stock_keys.insert(chem::canonical_smiles(m));
  std::vector<std::vector<PatternGraph>> roles;
  for (const ReactionTemplate &t : lib.templates())
    roles.push_back(component_patterns(t));

  // One forward step from `current`; returns the product and step text.
  auto step = [&](const Molecule &current) -> std::optional<std::pair<Molecule, std::string>> {
    std::vector<std::pair<std::size_t, std::size_t>> options; // template, role of `current`
    for (std::size_t t = 0; t < lib.size(); ++t)
      for (std::size_t r = 0; r < roles[t].size(); ++r)
        if (!find_embeddings(roles[t][r], current, 1).empty())
          options.emplace_back(t, r);
    for (int tries = 0; tries < 40 && !options.empty(); ++tries) {
      const auto [t, r] = options[draw_below(rng, options.size())];
      std::vector<Molecule> inputs{current};
      if (roles[t].size() == 2) {
        std::vector<const Molecule *> partners;
        for (const Molecule &m : stock)
          if (!find_embeddings(roles[t][1 - r], m, 1).empty())
            partners.push_back(&m);
        if (partners.empty())
          continue;
        inputs.push_back(*partners[draw_below(rng, partners.size())]);
      } else if (roles[t].size() != 1) {
        continue;
      }
      std::vector<ForwardOutcome> outcomes;
      for (ForwardOutcome &o : apply_template_forward(lib[t], map_reactants(inputs)))
        if (o.sources.size() == inputs.size())
          outcomes.push_back(std::move(o));
      if (outcomes.empty())
        continue;
      const Molecule product = outcomes[draw_below(rng, outcomes.size())].product.without_maps();
      const std::string smiles = chem::canonical_smiles(product);
      if (stock_keys.count(smiles))
        continue;
      const std::string key = set_key(inputs);
      const auto candidates = gen.propose(product);
      const bool reachable = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const search::Candidate &c) { return c.key == key; });
      if (reachable)
        return std::make_pair(product, key + ">>" + smiles);
    }
    return std::nullopt;
  };

  std::vector<SearchTarget> out;
  for (std::size_t depth = 1; depth <= per_depth.size(); ++depth) {
    std::size_t made = 0;
    for (int attempt = 0; attempt < 20000 && made < per_depth[depth - 1]; ++attempt) {
      Molecule current = stock[draw_below(rng, stock.size())];
      SearchTarget target;
      std::set<std::string> chain{chem::canonical_smiles(current)};
      for (std::size_t d = 0; d < depth; ++d) {
        auto next = step(current);
        if (!next || !chain.insert(chem::canonical_smiles(next->first)).second)
          break;
        current = next->first;
        target.steps.push_back(next->second);
      }
      if (target.steps.size() != depth)
        continue;
      target.smiles = chem::canonical_smiles(current);
      target.depth = depth;
      if (!taken.insert(target.smiles).second)
        continue;
      out.push_back(std::move(target));
      ++made;
    }
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  const std::vector<Rule> rules = make_rules();
  const std::vector<const Blocks *> all_blocks = {
      &kAcids,     &kAlcohols,         &kPrimaryAmines,  &kSecondaryAmines, &kAlkylBromides,
      &kArylBromides, &kBoronicAcids,  &kPhenols,        &kAldehydes,       &kSulfonylChlorides,
      &kAcidChlorides, &kIsocyanates,  &kKetones,        &kMethylEsters,    &kNitroArenes};

  Generator gen;
  constexpr std::size_t kTarget = 1000;
  for (const Rule &rule : rules)
    if (!rule.roles.empty())
      std::cerr << rule.name << ": " << gen.run_bimolecular(rule, rule.quota) << "\n";

  std::vector<Molecule> pool;
  std::set<std::string> seen;
  auto add_pool = [&](const Molecule &m) {
    if (seen.insert(chem::canonical_smiles(m)).second)
      pool.push_back(m);
  };
  for (const Blocks *list : all_blocks)
    for (const std::string &s : *list)
      add_pool(chem::parse_smiles(s));
  std::size_t pooled = 0;
  auto unimolecular_round = [&](std::size_t share) {
    for (; pooled < gen.products.size(); ++pooled)
      add_pool(gen.products[pooled]);
    for (const Rule &rule : rules)
      if (rule.roles.empty())
        std::cerr << rule.name << ": " << gen.run_unimolecular(rule, pool, rule.quota / share) << "\n";
  };
  unimolecular_round(2);
  for (std::size_t quota : {25, 15}) {
    for (const Rule &rule : rules)
      if (!rule.roles.empty())
        std::cerr << rule.name << " (extension): " << gen.run_extension(rule, quota) << "\n";
    unimolecular_round(4);
  }

  // Top up with further bimolecular reactions, round robin.
  for (std::size_t round = 0; gen.corpus.size() < kTarget && round < 100; ++round)
    for (const Rule &rule : rules)
      if (!rule.roles.empty() && gen.corpus.size() < kTarget)
        gen.run_bimolecular(rule, 1);
  if (gen.corpus.size() > kTarget)
    gen.corpus.resize(kTarget);

  std::ofstream corpus(dir / "corpus_1k.rxn");
  corpus << "# Synthetic mapped reactions: reactants>agents>product, id, class\n";
  for (const Reaction &r : gen.corpus)
    corpus << reaction_smiles(r, true) << '\t' << r.id << '\t' << r.reaction_class << '\n';

  std::set<std::string> stock;
  for (const Blocks *list : all_blocks)
    for (const std::string &s : *list)
      stock.insert(chem::canonical_smiles(chem::parse_smiles(s)));
  std::ofstream stock_out(dir / "stock.smi");
  for (const std::string &s : stock)
    stock_out << s << '\n';

  std::vector<Molecule> stock_mols;
  for (const std::string &s : stock)
    stock_mols.push_back(chem::parse_smiles(s));
  const auto targets = make_search_targets(gen.corpus, stock_mols, {12, 13, 13, 12});
  std::ofstream targets_out(dir / "search_targets.tsv");
  targets_out << "# target\tdepth\tconstruction steps (leaves first, ' ; ' separated)\n";
  for (const SearchTarget &t : targets) {
    targets_out << t.smiles << '\t' << t.depth << '\t';
    for (std::size_t i = 0; i < t.steps.size(); ++i)
      targets_out << (i ? " ; " : "") << t.steps[i];
    targets_out << '\n';
  }

  std::cerr << "corpus: " << gen.corpus.size() << " reactions, stock: " << stock.size()
            << ", search targets: " << targets.size() << "\n";
  return 0;
}

#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "retrogate/search/retro_star.hpp"
#include "support.hpp"

using namespace retrogate;
using namespace retrogate::search;
using reaction::Reaction;

namespace {

const std::vector<Reaction> &corpus() {
  static const std::vector<Reaction> c = reaction::read_corpus(test_support::data_path("corpus_1k.rxn")).reactions;
  return c;
}

const reaction::TemplateLibrary &library() {
  static const reaction::TemplateLibrary lib = reaction::extract_templates(corpus(), 1).library;
  return lib;
}

const BuildingBlockSet &stock() {
  static const BuildingBlockSet s = BuildingBlockSet::load(test_support::data_path("stock.smi"));
  return s;
}

struct Target {
  std::string smiles;
  int depth = 0;
  std::vector<std::string> steps;
};

std::vector<Target> targets() {
  std::vector<Target> out;
  for (const std::string &line : test_support::read_lines(test_support::data_path("search_targets.tsv"))) {
    if (line[0] == '#')
      continue;
    std::stringstream ss(line);
    Target t;
    std::string depth, steps;
    std::getline(ss, t.smiles, '\t');
    std::getline(ss, depth, '\t');
    std::getline(ss, steps);
    t.depth = std::stoi(depth);
    for (std::size_t start = 0;;) {
      const auto sep = steps.find(" ; ", start);
      t.steps.push_back(steps.substr(start, sep - start));
      if (sep == std::string::npos)
        break;
      start = sep + 3;
    }
    out.push_back(t);
  }
  return out;
}

// Leaves are in stock, every product is consumed later or is the target,
// and no molecule is made twice.
void check_route(const Route &r, const std::string &target) {
  std::set<std::string> made, available;
  for (const RouteStep &s : r.steps) {
    for (const std::string &m : s.reactants)
      if (!available.count(m)) {
        EXPECT_TRUE(stock().contains_canonical(m)) << m;
      }
    EXPECT_TRUE(made.insert(s.product).second) << "made twice: " << s.product;
    available.insert(s.product);
  }
  ASSERT_FALSE(r.steps.empty());
  EXPECT_EQ(r.steps.back().product, target);
  for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) {
    bool consumed = false;
    for (std::size_t j = i + 1; j < r.steps.size(); ++j)
      for (const std::string &m : r.steps[j].reactants)
        consumed = consumed || m == r.steps[i].product;
    EXPECT_TRUE(consumed) << r.steps[i].product;
  }
}

// Deterministic pseudo-scores so filter behaviour can be checked without
// trained models.
scoring::ScoreBundle pseudo_score(const Reaction &rxn, double thr) {
  std::string key;
  for (const auto &m : rxn.reactants)
    key += chem::canonical_smiles(m.without_maps()) + ".";
  const std::uint64_t h = fnv1a(key);
  scoring::ScoreBundle b;
  b.s_rgp = static_cast<double>(h % 1000) / 1000.0;
  b.s_rp = static_cast<double>((h / 1000) % 1000) / 1000.0;
  b.n_ref = (h >> 20) % 4;
  b.thr_rgp = b.thr_rp = thr;
  b.accepted = scoring::meta_binary(b.s_rgp, b.s_rp, b.n_ref, thr, thr);
  return b;
}

} // namespace

TEST(Stock, MembershipIsByCanonicalForm) {
  EXPECT_GT(stock().size(), 100u);
  EXPECT_TRUE(stock().contains(chem::parse_smiles("c1ccccc1C(=O)O")));
  EXPECT_TRUE(stock().contains(chem::parse_smiles("[OH:3][C:1](=[O:2])c1ccccc1")));
  EXPECT_FALSE(stock().contains(chem::parse_smiles("CCCCCCCCCCCCCC")));
}

TEST(Generator, CandidatesAreMappedNormalisedAndUnique) {
  const TemplateGenerator gen(library());
  const auto cands = gen.propose(chem::parse_smiles("CCOC(=O)c1ccccc1"));
  ASSERT_FALSE(cands.empty());
  std::set<std::string> keys;
  double total = 0.0;
  for (const Candidate &c : cands) {
    EXPECT_GT(c.probability, 0.0);
    EXPECT_LE(c.probability, 1.0);
    EXPECT_TRUE(keys.insert(c.key).second);
    total += c.probability;
    Reaction r{c.reactants, c.product, {}, "x", {}};
    EXPECT_NO_THROW(reaction::validate(r));
  }
  EXPECT_LE(total, 1.0 + 1e-12);
  std::vector<std::string> ester = {chem::canonical_smiles(chem::parse_smiles("OCC")),
                                    chem::canonical_smiles(chem::parse_smiles("OC(=O)c1ccccc1"))};
  std::sort(ester.begin(), ester.end());
  EXPECT_TRUE(keys.count(ester[0] + "." + ester[1]));
  for (std::size_t i = 1; i < cands.size(); ++i)
    EXPECT_GE(cands[i - 1].probability, cands[i].probability);
}

TEST(RetroStar, TargetInStockGivesEmptyRoute) {
  const TemplateGenerator gen(library());
  const auto r = retro_star("OC(=O)c1ccccc1", gen, stock());
  ASSERT_TRUE(r.route);
  EXPECT_TRUE(r.route->steps.empty());
  EXPECT_EQ(r.tree.expansions, 0u);
  EXPECT_THROW(retro_star("C1CC", gen, stock()), Error);
}

TEST(RetroStar, SolvesFixtureFamily) {
  const TemplateGenerator gen(library());
  const auto all = targets();
  ASSERT_EQ(all.size(), 50u);
  const auto start = std::chrono::steady_clock::now();
  std::size_t solved = 0, max_expansions = 0;
  for (const Target &t : all) {
    const auto r = retro_star(t.smiles, gen, stock());
    EXPECT_LE(r.tree.expansions, 500u);
    if (!r.route) {
      ADD_FAILURE() << "unsolved depth " << t.depth << ": " << t.smiles;
      continue;
    }
    ++solved;
    max_expansions = std::max(max_expansions, r.tree.expansions);
    check_route(*r.route, t.smiles);
    if (t.depth == 3) {
      EXPECT_LE(r.tree.expansions, 50u) << t.smiles;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "solved " << solved << "/" << all.size() << ", max expansions " << max_expansions << ", " << secs
            << " s\n";
}

TEST(RetroStar, FilterNeverAdmitsRejectedReactions) {
  const TemplateGenerator gen(library());
  std::size_t solved_with = 0, solved_without = 0;
  for (const Target &t : targets()) {
    SearchOptions opts;
    opts.expansion_limit = 100;
    opts.score = [](const Reaction &r) { return pseudo_score(r, 0.2); };
    const auto with = retro_star(t.smiles, gen, stock(), opts);
    opts.filter = false;
    const auto without = retro_star(t.smiles, gen, stock(), opts);
    for (const AndNode &a : with.tree.ands) {
      ASSERT_TRUE(a.bundle);
      if (!a.bundle->accepted) {
        EXPECT_TRUE(a.pruned);
        EXPECT_TRUE(a.children.empty());
      }
    }
    if (with.route) {
      ++solved_with;
      for (const RouteStep &s : with.route->steps)
        EXPECT_TRUE(s.bundle && s.bundle->accepted);
      EXPECT_TRUE(without.route.has_value()) << t.smiles;
    }
    solved_without += without.route.has_value();
  }
  EXPECT_LE(solved_with, solved_without);
  std::cout << "solved with filter " << solved_with << ", without " << solved_without << "\n";
}

TEST(RetroStar, RejectingTheNeededReactionRemovesIt) {
  const TemplateGenerator gen(library());
  std::size_t lost = 0;
  for (const Target &t : targets()) {
    if (t.depth != 1)
      continue;
    const std::string needed = t.steps[0];
    SearchOptions opts;
    opts.expansion_limit = 30;
    opts.score = [&](const Reaction &r) {
      scoring::ScoreBundle b;
      std::vector<std::string> parts;
      for (const auto &m : r.reactants)
        parts.push_back(chem::canonical_smiles(m.without_maps()));
      std::sort(parts.begin(), parts.end());
      std::string key;
      for (std::size_t i = 0; i < parts.size(); ++i)
        key += (i ? "." : "") + parts[i];
      b.accepted = key + ">>" + chem::canonical_smiles(r.product.without_maps()) != needed;
      return b;
    };
    const auto r = retro_star(t.smiles, gen, stock(), opts);
    for (const AndNode &a : r.tree.ands)
      if (a.key == needed) {
        EXPECT_TRUE(a.pruned);
        EXPECT_TRUE(a.children.empty());
      }
    if (r.route) {
      for (const RouteStep &s : r.route->steps)
        EXPECT_NE(s.key, needed);
    } else {
      ++lost;
    }
  }
  EXPECT_GT(lost, 0u);
}

TEST(Routes, ExtractPrefersCheaperThenSmallerKeys) {
  const BuildingBlockSet s({"CC", "CO", "CN"});
  SearchTree tree;
  tree.root = tree.or_node(chem::parse_smiles("CCCCO"), s);
  tree.ors[tree.root].expanded = true;
  auto add = [&](std::vector<std::string> reactants, double cost, std::string key) {
    AndNode a;
    a.parent = tree.root;
    a.cost = cost;
    a.key = std::move(key);
    const std::size_t id = tree.ands.size();
    for (const auto &r : reactants) {
      const std::size_t c = tree.or_node(chem::parse_smiles(r), s);
      a.children.push_back(c);
      tree.ors[c].parents.push_back(id);
    }
    tree.ors[tree.root].children.push_back(id);
    tree.ands.push_back(a);
  };
  add({"CC", "CO"}, 2.5, "a");
  add({"CC", "CN"}, 2.0, "b");
  EXPECT_EQ(extract_top_route(tree, s).steps.at(0).key, "b");
  add({"CO", "CN"}, 2.0, "a2");
  const Route r = extract_top_route(tree, s);
  EXPECT_EQ(r.steps.at(0).key, "a2");
  EXPECT_DOUBLE_EQ(r.total_cost, 2.0);
  const auto j = route_report(r);
  EXPECT_EQ(j["steps"].size(), 1u);
  EXPECT_EQ(j["total_cost"], 2.0);
  SearchTree empty;
  empty.ors.push_back({});
  EXPECT_THROW(extract_top_route(empty, s), Error);
}

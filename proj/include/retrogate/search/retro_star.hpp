#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrogate/scoring/bundle.hpp"
#include "retrogate/search/generator.hpp"
#include "retrogate/search/stock.hpp"

namespace retrogate::search {

using reaction::Reaction;
using scoring::ScoreBundle;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct OrNode {
  Molecule mol;
  std::string smiles; // canonical, map-free
  bool in_stock = false;
  bool expanded = false;
  std::vector<std::size_t> children; // AND nodes
  std::vector<std::size_t> parents;  // AND nodes
};

struct AndNode {
  std::size_t parent = 0;
  std::vector<std::size_t> children; // OR nodes, one per reactant (may repeat)
  Reaction reaction;
  std::string key; // "reactants>>product", canonical and map-free
  double probability = 1.0;
  double cost = 0.0; // -log probability
  std::optional<ScoreBundle> bundle;
  bool pruned = false; // rejected by the filter; never has children
};

/// AND-OR graph: molecules are shared between branches by canonical SMILES.
struct SearchTree {
  std::vector<OrNode> ors;
  std::vector<AndNode> ands;
  std::map<std::string, std::size_t> or_of;
  std::size_t root = 0;
  std::size_t expansions = 0;

  std::size_t or_node(const Molecule &mol, const BuildingBlockSet &stock) {
    const Molecule plain = mol.without_maps();
    const std::string smiles = chem::canonical_smiles(plain);
    auto [it, inserted] = or_of.emplace(smiles, ors.size());
    if (inserted) {
      OrNode n;
      n.mol = plain;
      n.smiles = smiles;
      n.in_stock = stock.contains_canonical(smiles);
      ors.push_back(std::move(n));
    }
    return it->second;
  }

  /// Least cost of a derivation of every OR node (sum of reaction costs over
  /// a hypertree). Leaves in stock cost 0; unexpanded molecules cost
  /// `open_cost(node)` (use infinity to ask "is it solved?"). Generalised
  /// Dijkstra over the AND-OR graph, so cycles never lower a value.
  std::pair<std::vector<double>, std::vector<double>>
  values(const std::function<double(const OrNode &)> &open_cost) const {
    std::vector<double> orv(ors.size(), kInf), andv(ands.size(), kInf);
    std::vector<bool> done(ors.size(), false);
    std::vector<std::size_t> remaining(ands.size());
    std::vector<double> partial(ands.size(), 0.0);
    for (std::size_t a = 0; a < ands.size(); ++a)
      remaining[a] = ands[a].children.size();
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (std::size_t o = 0; o < ors.size(); ++o) {
      if (ors[o].in_stock)
        orv[o] = 0.0;
      else if (!ors[o].expanded)
        orv[o] = open_cost(ors[o]);
      if (orv[o] < kInf)
        queue.push({orv[o], o});
    }
    while (!queue.empty()) {
      const auto [v, o] = queue.top();
      queue.pop();
      if (done[o] || v > orv[o])
        continue;
      done[o] = true;
      for (std::size_t a : ors[o].parents) {
        const AndNode &and_node = ands[a];
        for (std::size_t c : and_node.children)
          if (c == o) {
            --remaining[a];
            partial[a] += v;
          }
        if (remaining[a] != 0)
          continue;
        andv[a] = and_node.cost + partial[a];
        const std::size_t p = and_node.parent;
        if (!done[p] && ors[p].expanded && !ors[p].in_stock && andv[a] < orv[p]) {
          orv[p] = andv[a];
          queue.push({orv[p], p});
        }
      }
    }
    return {orv, andv};
  }
};

struct SearchOptions {
  std::size_t expansion_limit = 500;
  /// Scores every candidate reaction before insertion; empty means no scoring.
  std::function<ScoreBundle(const Reaction &)> score;
  /// When true (and `score` is set), candidates with meta_binary = 0 are dropped.
  bool filter = true;
  /// Cost-to-go estimate for an unexpanded molecule.
  std::function<double(const Molecule &)> heuristic;
};

struct RouteStep {
  Reaction reaction;
  std::string product;                // canonical SMILES
  std::vector<std::string> reactants; // canonical SMILES
  std::vector<std::string> in_stock_leaves;
  double probability = 1.0;
  double cost = 0.0;
  std::optional<ScoreBundle> bundle;
  std::string key;
};

/// Leaf-to-target ordered reactions; every product is consumed later or is
/// the target.
struct Route {
  std::string target;
  std::vector<RouteStep> steps;
  double total_cost = 0.0;
  std::size_t expansions = 0;
};

struct SearchResult {
  SearchTree tree;
  std::optional<Route> route;
  std::size_t pruned = 0;
};

namespace detail {

// Lowest-cost solved derivation below `o`, reactions in post order. Ties
// (equal cost) go to the lexicographically smaller key chain.
inline std::optional<std::pair<double, std::vector<std::size_t>>>
best_solved(const SearchTree &t, const std::vector<double> &orv, const std::vector<double> &andv, std::size_t o,
            std::set<std::size_t> &path) {
  const OrNode &n = t.ors[o];
  if (n.in_stock)
    return std::make_pair(0.0, std::vector<std::size_t>{});
  if (!(orv[o] < kInf) || path.count(o))
    return std::nullopt;
  path.insert(o);
  std::optional<std::pair<double, std::vector<std::size_t>>> best;
  std::vector<std::string> best_chain;
  for (std::size_t a : n.children) {
    const AndNode &and_node = t.ands[a];
    if (and_node.pruned || !(andv[a] < kInf) || andv[a] > orv[o] + 1e-12)
      continue;
    std::vector<std::size_t> order;
    double cost = and_node.cost;
    bool ok = true;
    std::set<std::size_t> seen_child;
    for (std::size_t c : and_node.children) {
      if (!seen_child.insert(c).second)
        continue;
      auto sub = best_solved(t, orv, andv, c, path);
      if (!sub) {
        ok = false;
        break;
      }
      cost += sub->first;
      for (std::size_t x : sub->second)
        if (std::find(order.begin(), order.end(), x) == order.end())
          order.push_back(x);
    }
    if (!ok)
      continue;
    order.push_back(a);
    std::vector<std::string> chain;
    for (std::size_t x : order)
      chain.push_back(t.ands[x].key);
    if (!best || cost < best->first - 1e-12 || (std::abs(cost - best->first) <= 1e-12 && chain < best_chain)) {
      best = std::make_pair(cost, std::move(order));
      best_chain = std::move(chain);
    }
  }
  path.erase(o);
  return best;
}

// First open molecule of the most promising partial solution, found by
// descending through the cheapest AND child at every OR node.
inline std::optional<std::size_t> select_open(const SearchTree &t, const std::vector<double> &orv,
                                              const std::vector<double> &andv, std::size_t o,
                                              std::set<std::size_t> &path) {
  const OrNode &n = t.ors[o];
  if (n.in_stock || !(orv[o] < kInf))
    return std::nullopt;
  if (!n.expanded)
    return o;
  if (path.count(o))
    return std::nullopt;
  path.insert(o);
  std::vector<std::size_t> order;
  for (std::size_t a : n.children)
    if (!t.ands[a].pruned && andv[a] < kInf)
      order.push_back(a);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return andv[a] != andv[b] ? andv[a] < andv[b] : t.ands[a].key < t.ands[b].key;
  });
  std::optional<std::size_t> found;
  for (std::size_t a : order) {
    for (std::size_t c : t.ands[a].children)
      if ((found = select_open(t, orv, andv, c, path)))
        break;
    if (found)
      break;
  }
  path.erase(o);
  return found;
}

} // namespace detail

/// Minimum-cost solved route in the tree, leaves first. Throws NoSolution.
inline Route extract_top_route(const SearchTree &tree, const BuildingBlockSet &stock) {
  const auto [orv, andv] = tree.values([](const OrNode &) { return kInf; });
  std::set<std::size_t> path;
  auto best = detail::best_solved(tree, orv, andv, tree.root, path);
  if (tree.ors.empty() || !best)
    throw Error(ErrorCode::NoSolution, "search tree has no solved route");
  Route route;
  route.target = tree.ors[tree.root].smiles;
  route.expansions = tree.expansions;
  for (std::size_t a : best->second) {
    const AndNode &n = tree.ands[a];
    RouteStep s;
    s.reaction = n.reaction;
    s.product = tree.ors[n.parent].smiles;
    for (std::size_t c : n.children) {
      s.reactants.push_back(tree.ors[c].smiles);
      if (stock.contains_canonical(tree.ors[c].smiles))
        s.in_stock_leaves.push_back(tree.ors[c].smiles);
    }
    s.probability = n.probability;
    s.cost = n.cost;
    s.bundle = n.bundle;
    s.key = n.key;
    route.total_cost += n.cost;
    route.steps.push_back(std::move(s));
  }
  return route;
}

/// Best-first AND-OR search. Each iteration expands the first open molecule
/// of the cheapest partial solution (reaction cost -log p plus the
/// heuristic at open leaves), inserting only candidates that pass the
/// filter. Stops when the target is solved or the expansion budget is spent.
inline SearchResult retro_star(const Molecule &target, const SingleStepGenerator &gen,
                               const BuildingBlockSet &stock, const SearchOptions &opts = {}) {
  if (target.size() == 0)
    throw Error(ErrorCode::InvalidTarget, "target molecule is empty");
  SearchResult result;
  SearchTree &tree = result.tree;
  tree.root = tree.or_node(target, stock);
  if (tree.ors[tree.root].in_stock) {
    Route r;
    r.target = tree.ors[tree.root].smiles;
    result.route = r;
    return result;
  }
  auto open_cost = [&](const OrNode &n) { return opts.heuristic ? opts.heuristic(n.mol) : 0.0; };
  while (tree.expansions < opts.expansion_limit) {
    const auto [orv, andv] = tree.values(open_cost);
    std::set<std::size_t> path;
    const auto pick = detail::select_open(tree, orv, andv, tree.root, path);
    if (!pick)
      break; // nothing left to expand
    const std::size_t o = *pick;
    tree.ors[o].expanded = true;
    ++tree.expansions;
    const Molecule mol = tree.ors[o].mol;
    const std::string product_smiles = tree.ors[o].smiles;
    std::size_t k = 0;
    for (Candidate &c : gen.propose(mol)) {
      ++k;
      AndNode a;
      a.parent = o;
      a.probability = c.probability;
      a.cost = -std::log(c.probability);
      a.key = c.key + ">>" + product_smiles;
      a.reaction.reactants = c.reactants;
      a.reaction.product = c.product;
      a.reaction.id = "search:" + std::to_string(tree.expansions) + ":" + std::to_string(k);
      bool self_loop = false;
      for (const Molecule &m : c.reactants)
        self_loop = self_loop || chem::canonical_smiles(m.without_maps()) == product_smiles;
      if (self_loop)
        continue;
      if (opts.score) {
        a.bundle = opts.score(a.reaction);
        if (opts.filter && !a.bundle->accepted) {
          a.pruned = true;
          ++result.pruned;
          tree.ors[o].children.push_back(tree.ands.size());
          tree.ands.push_back(std::move(a));
          continue;
        }
      }
      const std::size_t id = tree.ands.size();
      for (const Molecule &m : c.reactants) {
        const std::size_t child = tree.or_node(m, stock);
        a.children.push_back(child);
        auto &parents = tree.ors[child].parents;
        if (parents.empty() || parents.back() != id)
          parents.push_back(id);
      }
      tree.ors[o].children.push_back(id);
      tree.ands.push_back(std::move(a));
    }
    const auto solved = tree.values([](const OrNode &) { return kInf; }).first;
    if (solved[tree.root] < kInf)
      break;
  }
  try {
    result.route = extract_top_route(tree, stock);
  } catch (const Error &) {
  }
  return result;
}

inline SearchResult retro_star(const std::string &target_smiles, const SingleStepGenerator &gen,
                               const BuildingBlockSet &stock, const SearchOptions &opts = {}) {
  chem::Molecule target;
  try {
    target = chem::parse_smiles(target_smiles);
  } catch (const Error &e) {
    throw Error(ErrorCode::InvalidTarget, std::string("target does not parse: ") + e.what(), e.offset());
  }
  return retro_star(target, gen, stock, opts);
}

/// Map-free display text of a reaction and the [offset, length] character
/// spans of its reaction-center atoms within that text.
inline std::pair<std::string, std::vector<std::array<std::size_t, 2>>> center_spans(const Reaction &rxn) {
  const scoring::SerializedReaction ser = scoring::serialize(rxn);
  const auto starts = scoring::token_starts(ser.text);
  std::set<std::size_t> tokens;
  for (const reaction::AtomRef &ref : reaction::reaction_center(rxn))
    tokens.insert(ser.atom_token.at(ref));
  std::vector<std::array<std::size_t, 2>> spans;
  for (std::size_t t : tokens) {
    const std::size_t end = t + 1 < starts.size() ? starts[t + 1] : ser.text.size();
    spans.push_back({starts[t], end - starts[t]});
  }
  return {ser.text, spans};
}

/// Route JSON: {target, steps: [{product, reactants, scores, in_stock_leaves}], total_cost, expansions}.
/// Steps also carry the display text and reaction-center spans.
inline nlohmann::json route_report(const Route &route) {
  nlohmann::json steps = nlohmann::json::array();
  for (const RouteStep &s : route.steps) {
    nlohmann::json step = {{"product", s.product},
                           {"reactants", s.reactants},
                           {"in_stock_leaves", s.in_stock_leaves},
                           {"reaction", reaction::reaction_smiles(s.reaction)},
                           {"generator_probability", s.probability},
                           {"cost", s.cost},
                           {"scores", s.bundle ? scoring::to_json(*s.bundle) : nlohmann::json()}};
    try {
      auto [text, spans] = center_spans(s.reaction);
      step["display"] = text;
      step["center_spans"] = spans;
    } catch (const std::exception &) {
      step["display"] = nullptr;
      step["center_spans"] = nlohmann::json::array();
    }
    steps.push_back(std::move(step));
  }
  return {{"target", route.target},
          {"steps", std::move(steps)},
          {"total_cost", route.total_cost},
          {"expansions", route.expansions}};
}

} // namespace retrogate::search

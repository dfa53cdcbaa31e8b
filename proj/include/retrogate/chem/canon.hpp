#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

namespace retrogate::chem {

/// Node- and edge-labelled undirected graph handed to the canonicaliser.
/// `node_labels` seed the partition refinement; `node_identity` must
/// distinguish everything the renderer prints (it is used to recognise
/// interchangeable leaves). Edges carry the same pair of roles.
struct LabeledGraph {
  struct Arc {
    std::uint32_t to;
    std::uint64_t label;
    std::uint64_t identity;
  };

  std::vector<std::uint64_t> node_labels;
  std::vector<std::uint64_t> node_identity;
  std::vector<std::vector<Arc>> adjacency;

  explicit LabeledGraph(std::size_t n = 0)
      : node_labels(n, 0), node_identity(n, 0), adjacency(n) {}

  std::size_t size() const noexcept { return node_labels.size(); }

  void add_edge(std::uint32_t a, std::uint32_t b, std::uint64_t label) {
    add_edge(a, b, label, label);
  }

  void add_edge(std::uint32_t a, std::uint32_t b, std::uint64_t label, std::uint64_t identity) {
    adjacency[a].push_back({b, label, identity});
    adjacency[b].push_back({a, label, identity});
  }
};

namespace detail {

/// Ranks are class start positions: every node in a class of size k starting
/// at sorted position r carries rank r.
inline std::vector<std::uint32_t> initial_ranks(const std::vector<std::uint64_t> &labels) {
  const std::size_t n = labels.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::uint32_t a, std::uint32_t b) { return labels[a] < labels[b]; });
  std::vector<std::uint32_t> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && labels[order[i]] == labels[order[i - 1]])
      ranks[order[i]] = ranks[order[i - 1]];
    else
      ranks[order[i]] = static_cast<std::uint32_t>(i);
  }
  return ranks;
}

inline std::size_t count_classes(const std::vector<std::uint32_t> &ranks) {
  std::vector<std::uint32_t> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

/// Iterated neighbourhood refinement to the coarsest equitable partition that
/// refines `ranks`. Relative order of existing classes is preserved.
inline void refine(const LabeledGraph &g, std::vector<std::uint32_t> &ranks) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> sig(n);
  std::vector<std::uint32_t> order(n);
  std::size_t classes = count_classes(ranks);
  while (classes < n) {
    for (std::uint32_t v = 0; v < n; ++v) {
      auto &s = sig[v];
      s.clear();
      s.emplace_back(ranks[v], 0);
      for (const auto &arc : g.adjacency[v])
        s.emplace_back(ranks[arc.to], arc.label);
      std::sort(s.begin() + 1, s.end());
    }
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return sig[a] < sig[b]; });
    std::vector<std::uint32_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && sig[order[i]] == sig[order[i - 1]])
        next[order[i]] = next[order[i - 1]];
      else
        next[order[i]] = static_cast<std::uint32_t>(i);
    }
    const std::size_t next_classes = count_classes(next);
    ranks = std::move(next);
    if (next_classes == classes)
      break;
    classes = next_classes;
  }
}

template <class Render> struct CanonSearch {
  const LabeledGraph &graph;
  Render &render;
  std::string best;
  std::vector<std::uint32_t> best_ranks;
  bool have_best = false;

  void run(std::vector<std::uint32_t> ranks) {
    refine(graph, ranks);
    const std::size_t n = ranks.size();
    // First tied class, by rank value.
    std::vector<std::uint32_t> counts(n, 0);
    for (std::uint32_t r : ranks)
      ++counts[r];
    std::uint32_t tied = static_cast<std::uint32_t>(n);
    for (std::uint32_t r = 0; r < n; ++r)
      if (counts[r] > 1) {
        tied = r;
        break;
      }
    if (tied == n) {
      std::string s = render(ranks);
      if (!have_best || s < best) {
        best = std::move(s);
        best_ranks = ranks;
        have_best = true;
      }
      return;
    }
    std::vector<std::uint32_t> members;
    for (std::uint32_t v = 0; v < n; ++v)
      if (ranks[v] == tied)
        members.push_back(v);
    for (std::uint32_t candidate : prune_equivalent_leaves(members)) {
      std::vector<std::uint32_t> next = ranks;
      for (std::uint32_t m : members)
        next[m] = tied + 1;
      next[candidate] = tied;
      run(std::move(next));
    }
  }

  // Two degree-one nodes with equal identity hanging off the same neighbour
  // through equal edges are swapped by an automorphism; exploring one suffices.
  std::vector<std::uint32_t> prune_equivalent_leaves(const std::vector<std::uint32_t> &members) const {
    std::vector<std::uint32_t> kept;
    std::vector<std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>> seen;
    for (std::uint32_t v : members) {
      const auto &adj = graph.adjacency[v];
      if (adj.size() == 1) {
        auto key = std::make_tuple(adj[0].to, adj[0].identity, graph.node_identity[v]);
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
          continue;
        seen.push_back(key);
      }
      kept.push_back(v);
    }
    return kept;
  }
};

} // namespace detail

/// Canonical ranking of a labelled graph: refinement seeded from the node
/// labels, remaining ties broken by exploring every individualisation of the
/// first tied class and keeping the ranking whose rendering is
/// lexicographically smallest. `render(ranks)` receives a permutation of
/// 0..n-1 and must depend only on the labelled graph under that ranking.
template <class Render>
std::vector<std::uint32_t> canonical_ranking(const LabeledGraph &graph, Render &&render,
                                             std::string *rendered = nullptr) {
  if (graph.size() == 0) {
    if (rendered)
      *rendered = render(std::vector<std::uint32_t>{});
    return {};
  }
  detail::CanonSearch<std::remove_reference_t<Render>> search{graph, render, {}, {}, false};
  search.run(detail::initial_ranks(graph.node_labels));
  if (rendered)
    *rendered = search.best;
  return search.best_ranks;
}

} // namespace retrogate::chem

#include "rum/walker.hpp"

#include <algorithm>
#include <ostream>
#include <thread>

#include "rum/error.hpp"

namespace rum {

void validate(const WalkConfig& cfg) {
  if (cfg.walks_per_node < 1) throw ConfigError("walk.walks_per_node must be >= 1");
  if (cfg.walk_length < 2) throw ConfigError("walk.length must be >= 2");
  if (cfg.window < 1) throw ConfigError("walk.window must be >= 1");
  if (!(cfg.p > 0) || !(cfg.q > 0)) throw ConfigError("walk.p and walk.q must be > 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

NodeId next_step(const Graph& graph, NodeId prev, NodeId cur, double p,
                 double q, Rng& rng) {
  auto nbrs = graph.neighbors(cur);
  if (p == 1.0 && q == 1.0) return nbrs[uniform_below(rng, nbrs.size())];

  const double w_return = 1.0 / p;
  const double w_out = 1.0 / q;
  auto prev_nbrs = graph.neighbors(prev);
  auto weight = [&](NodeId x) {
    if (x == prev) return w_return;
    if (std::binary_search(prev_nbrs.begin(), prev_nbrs.end(), x)) return 1.0;
    return w_out;
  };
  double total = 0;
  for (NodeId x : nbrs) total += weight(x);
  double r = uniform01(rng) * total;
  for (NodeId x : nbrs) {
    r -= weight(x);
    if (r < 0) return x;
  }
  return nbrs.back();
}

Walk random_walk(const Graph& graph, NodeId start, const WalkConfig& cfg,
                 Rng& rng) {
  Walk walk;
  walk.reserve(static_cast<std::size_t>(cfg.walk_length));
  walk.push_back(start);
  if (graph.degree(start) == 0) return walk;
  auto first = graph.neighbors(start);
  walk.push_back(first[uniform_below(rng, first.size())]);
  while (walk.size() < static_cast<std::size_t>(cfg.walk_length)) {
    NodeId prev = walk[walk.size() - 2];
    NodeId cur = walk.back();
    walk.push_back(next_step(graph, prev, cur, cfg.p, cfg.q, rng));
  }
  return walk;
}

std::vector<Walk> generate_walks(const Graph& graph, const WalkConfig& cfg) {
  validate(cfg);
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  const auto rounds = static_cast<std::size_t>(cfg.walks_per_node);
  std::vector<NodeId> starts;
  starts.reserve(n * rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    std::vector<NodeId> order(n);
    for (std::size_t v = 0; v < n; ++v) order[v] = static_cast<NodeId>(v);
    Rng rng(derive_seed(cfg.seed, 0x5707, r));
    shuffle(std::span(order), rng);
    starts.insert(starts.end(), order.begin(), order.end());
  }

  std::vector<Walk> walks(starts.size());
  auto run = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(starts[k]),
                          k / n + 1));
      walks[k] = random_walk(graph, starts[k], cfg, rng);
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), walks.size());
  if (threads <= 1) {
    run(0, walks.size());
  } else {
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back(run, walks.size() * t / threads,
                           walks.size() * (t + 1) / threads);
    }
    for (auto& w : workers) w.join();
  }
  return walks;
}

PairCounts count_cooccurrences(const std::vector<Walk>& walks, int window,
                               bool binary) {
  if (window < 1) throw ConfigError("window must be >= 1");
  std::size_t reserve = 0;
  for (const auto& walk : walks) {
    reserve += walk.size() * static_cast<std::size_t>(window);
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(reserve);
  for (const auto& walk : walks) {
    for (std::size_t k = 0; k < walk.size(); ++k) {
      const std::size_t end =
          std::min(walk.size(), k + static_cast<std::size_t>(window) + 1);
      for (std::size_t o = k + 1; o < end; ++o) {
        if (walk[k] != walk[o]) keys.push_back(PairCounts::key(walk[k], walk[o]));
      }
    }
  }
  PairCounts counts = PairCounts::from_keys(std::move(keys));
  if (!binary) return counts;
  std::vector<PairCount> clipped(counts.entries().begin(),
                                 counts.entries().end());
  for (auto& e : clipped) e.count = 1;
  return PairCounts::from_sorted(std::move(clipped));
}

void write_walks(const std::vector<Walk>& walks, const Graph& graph,
                 std::ostream& out) {
  for (const auto& walk : walks) {
    for (std::size_t k = 0; k < walk.size(); ++k) {
      if (k) out << ' ';
      out << graph.label(walk[k]);
    }
    out << '\n';
  }
}

}  // namespace rum

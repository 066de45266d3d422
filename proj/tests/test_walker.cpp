#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "rum/error.hpp"
#include "rum/walker.hpp"
#include "support/fixtures.hpp"

using namespace rum;

namespace {

struct KernelCase {
  const char* name;
  std::vector<Edge> edges;
  NodeId prev, cur;
  double p, q;
};

// Transition probabilities written out from the 1/p, 1, 1/q rule.
std::map<NodeId, double> analytic_kernel(const Graph& g, NodeId prev, NodeId cur, double p,
                                         double q) {
  std::map<NodeId, double> w;
  double total = 0;
  for (NodeId x : g.neighbors(cur)) {
    double weight = x == prev ? 1 / p : (g.has_edge(prev, x) ? 1.0 : 1 / q);
    w[x] = weight;
    total += weight;
  }
  for (auto& [x, v] : w) v /= total;
  return w;
}

PairCounts naive_cooccurrence(const std::vector<Walk>& walks, int window, bool binary) {
  std::map<std::pair<NodeId, NodeId>, std::uint64_t> counts;
  for (const auto& walk : walks) {
    for (std::size_t a = 0; a < walk.size(); ++a) {
      for (std::size_t b = a + 1; b < walk.size() && b <= a + window; ++b) {
        if (walk[a] == walk[b]) continue;
        auto key = std::minmax(walk[a], walk[b]);
        counts[{key.first, key.second}] += 1;
      }
    }
  }
  std::vector<PairCount> entries;
  for (auto [key, c] : counts) entries.push_back({key.first, key.second, binary ? 1 : c});
  return PairCounts::from_sorted(entries);
}

}  // namespace

TEST(Walker, SecondOrderKernelFrequencies) {
  const std::vector<KernelCase> cases = {
      {"star return", {{0, 1}, {1, 2}, {1, 3}}, 0, 1, 0.25, 1.0},
      {"triangle plus tail", {{0, 1}, {1, 2}, {0, 2}, {1, 3}}, 0, 1, 1.0, 4.0},
      {"cycle", {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 0, 1, 2.0, 0.5},
      {"complete", {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, 2, 3, 0.5, 3.0},
      {"diamond", {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}}, 0, 1, 3.0, 0.25},
  };
  const int draws = 200000;
  for (const auto& c : cases) {
    auto g = Graph::from_edges(4, c.edges);
    auto expected = analytic_kernel(g, c.prev, c.cur, c.p, c.q);
    std::map<NodeId, int> seen;
    Rng rng(12345);
    for (int k = 0; k < draws; ++k) ++seen[next_step(g, c.prev, c.cur, c.p, c.q, rng)];
    for (auto [x, prob] : expected) {
      const double sigma = std::sqrt(draws * prob * (1 - prob));
      EXPECT_LE(std::abs(seen[x] - draws * prob), 3 * sigma) << c.name << " -> " << x;
    }
    for (auto [x, count] : seen) EXPECT_TRUE(expected.count(x)) << c.name;
  }
}

TEST(Walker, WalksFollowEdges) {
  auto g = fixtures::gnp(50, 0.1, 2);
  WalkConfig cfg;
  cfg.walks_per_node = 3;
  cfg.walk_length = 20;
  cfg.p = 0.5;
  cfg.q = 2.0;
  auto walks = generate_walks(g, cfg);
  ASSERT_EQ(walks.size(), 150u);
  std::vector<int> starts(50, 0);
  for (const auto& w : walks) {
    ++starts[w.front()];
    if (g.degree(w.front()) == 0) {
      EXPECT_EQ(w.size(), 1u);
      continue;
    }
    EXPECT_EQ(w.size(), 20u);
    for (std::size_t k = 1; k < w.size(); ++k) EXPECT_TRUE(g.has_edge(w[k - 1], w[k]));
  }
  for (int s : starts) EXPECT_EQ(s, 3);
}

TEST(Walker, EachRoundCoversEveryNodeOnce) {
  auto g = fixtures::cliques({5, 4});
  WalkConfig cfg;
  cfg.walks_per_node = 4;
  cfg.walk_length = 5;
  auto walks = generate_walks(g, cfg);
  for (std::size_t r = 0; r < 4; ++r) {
    std::vector<NodeId> firsts;
    for (std::size_t k = 0; k < 9; ++k) firsts.push_back(walks[r * 9 + k].front());
    std::sort(firsts.begin(), firsts.end());
    for (NodeId v = 0; v < 9; ++v) EXPECT_EQ(firsts[v], v);
  }
}

TEST(Walker, ThreadCountDoesNotChangeWalks) {
  auto g = fixtures::gnp(120, 0.05, 9);
  WalkConfig cfg;
  cfg.walks_per_node = 2;
  cfg.walk_length = 30;
  cfg.p = 0.7;
  cfg.q = 1.3;
  cfg.seed = 77;
  auto one = generate_walks(g, cfg);
  cfg.threads = 4;
  EXPECT_EQ(one, generate_walks(g, cfg));
  cfg.seed = 78;
  EXPECT_NE(one, generate_walks(g, cfg));
}

TEST(Walker, UniformWhenPAndQAreOne) {
  std::vector<Edge> edges{{0, 1}, {1, 2}, {1, 3}, {1, 4}, {2, 3}};
  auto g = Graph::from_edges(5, edges);
  Rng rng(3);
  std::map<NodeId, int> seen;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) ++seen[next_step(g, 0, 1, 1.0, 1.0, rng)];
  for (NodeId x : {0, 2, 3, 4}) {
    const double sigma = std::sqrt(draws * 0.25 * 0.75);
    EXPECT_LE(std::abs(seen[x] - draws * 0.25), 3 * sigma);
  }
}

TEST(Cooccurrence, HandWorkedWalk) {
  std::vector<Walk> walks{{0, 1, 2, 1}};
  auto w = count_cooccurrences(walks, 2);
  // (0,1) (0,2) (1,2) (2,1); the (1,1) pair is skipped.
  EXPECT_EQ(w.at(0, 1), 1u);
  EXPECT_EQ(w.at(0, 2), 1u);
  EXPECT_EQ(w.at(1, 2), 2u);
  EXPECT_EQ(w.size(), 3u);
  auto b = count_cooccurrences(walks, 2, true);
  EXPECT_EQ(b.at(1, 2), 1u);
}

TEST(Cooccurrence, MatchesNaiveCount) {
  auto g = fixtures::gnp(40, 0.15, 4);
  WalkConfig cfg;
  cfg.walks_per_node = 2;
  cfg.walk_length = 15;
  cfg.q = 0.5;
  auto walks = generate_walks(g, cfg);
  for (int window : {1, 3, 7}) {
    EXPECT_EQ(count_cooccurrences(walks, window), naive_cooccurrence(walks, window, false));
    EXPECT_EQ(count_cooccurrences(walks, window, true), naive_cooccurrence(walks, window, true));
  }
}

TEST(Cooccurrence, WindowOneOnlySeesEdges) {
  auto g = fixtures::gnp(30, 0.2, 6);
  WalkConfig cfg;
  cfg.walk_length = 10;
  auto w = count_cooccurrences(generate_walks(g, cfg), 1);
  for (const auto& e : w.entries()) EXPECT_TRUE(g.has_edge(e.i, e.j));
}

TEST(Walker, InvalidConfig) {
  WalkConfig cfg;
  cfg.p = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.walk_length = 1;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = {};
  cfg.window = 0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Walker, WriteWalksUsesLabels) {
  std::istringstream in("a b\n");
  auto g = read_edge_list(in);
  std::ostringstream out;
  write_walks({{0, 1, 0}}, g, out);
  EXPECT_EQ(out.str(), "a b a\n");
}

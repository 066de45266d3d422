#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rum/graph.hpp"
#include "rum/random.hpp"
#include "rum/structure.hpp"

namespace rum {

struct WalkConfig {
  int walks_per_node = 10;
  int walk_length = 80;
  int window = 5;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  bool binary = false;  // clip co-occurrence counts to 1
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Throws ConfigError when the configuration is unusable.
void validate(const WalkConfig& cfg);

using Walk = std::vector<NodeId>;

/// Samples the next node of a second-order walk currently at `cur` having
/// arrived from `prev`: neighbor x has weight 1/p if x == prev, 1 if x is
/// adjacent to prev and 1/q otherwise.
NodeId next_step(const Graph& graph, NodeId prev, NodeId cur, double p,
                 double q, Rng& rng);

/// One walk from `start`; the first step is uniform over neighbors.
Walk random_walk(const Graph& graph, NodeId start, const WalkConfig& cfg,
                 Rng& rng);

/// walks_per_node rounds; each round visits every start node in a freshly
/// shuffled order. Walk k of round r from start s uses a generator seeded by
/// (seed, s, r), so the output does not depend on the thread count.
std::vector<Walk> generate_walks(const Graph& graph, const WalkConfig& cfg);

/// Each pair (walk[k], walk[k + o]) with 1 <= o <= window and distinct
/// endpoints adds one to the unordered pair's count.
PairCounts count_cooccurrences(const std::vector<Walk>& walks, int window,
                               bool binary = false);

/// One walk per line, space-separated external labels.
void write_walks(const std::vector<Walk>& walks, const Graph& graph,
                 std::ostream& out);

}  // namespace rum

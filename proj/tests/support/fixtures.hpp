#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rum/graph.hpp"
#include "rum/structure.hpp"

namespace rum::fixtures {

inline std::filesystem::path data_dir() { return RUM_TEST_DATA_DIR; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("rum_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Erdos-Renyi G(n, p), u < v.
inline std::vector<Edge> gnp_edges(NodeId n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng) < p) edges.emplace_back(u, v);
    }
  }
  return edges;
}

inline Graph gnp(NodeId n, double p, std::uint64_t seed) {
  auto edges = gnp_edges(n, p, seed);
  return Graph::from_edges(n, edges);
}

/// Cliques of the given sizes on consecutive ids, plus `bridges` extra edges.
inline Graph cliques(const std::vector<NodeId>& sizes, const std::vector<Edge>& bridges = {}) {
  std::vector<Edge> edges = bridges;
  NodeId base = 0;
  for (NodeId k : sizes) {
    for (NodeId a = 0; a < k; ++a) {
      for (NodeId b = a + 1; b < k; ++b) edges.emplace_back(base + a, base + b);
    }
    base += k;
  }
  return Graph::from_edges(base, edges);
}

/// Two triangles {0,1,2} and {3,4,5}, no bridge.
inline Graph two_triangles() { return cliques({3, 3}); }

inline Graph karate() { return load_edge_list(data_dir() / "karate.txt"); }

/// Planted partition: `blocks` equal blocks of `block_size`, intra-block
/// probability p_in, inter-block p_out.
inline Graph planted_partition(int blocks, NodeId block_size, double p_in, double p_out,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const NodeId n = blocks * block_size;
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      double p = (u / block_size == v / block_size) ? p_in : p_out;
      if (coin(rng) < p) edges.emplace_back(u, v);
    }
  }
  return Graph::from_edges(n, edges);
}

/// Degree-corrected block model shaped like a small citation graph: seven
/// classes, heavy-tailed degrees, 80% homophily, then triadic closure.
/// Writes edges.txt and labels.txt into dir.
inline void write_citation_like(const std::filesystem::path& dir, std::uint64_t seed) {
  const std::vector<NodeId> sizes{818, 426, 418, 351, 298, 217, 180};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<int> cls;
  std::vector<std::vector<NodeId>> members(sizes.size());
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    for (NodeId k = 0; k < sizes[c]; ++k) {
      members[c].push_back(static_cast<NodeId>(cls.size()));
      cls.push_back(static_cast<int>(c));
    }
  }
  const NodeId n = static_cast<NodeId>(cls.size());
  std::vector<double> theta(n);
  for (auto& t : theta) t = std::pow(1.0 - coin(rng), -1.0 / 1.8);
  std::discrete_distribution<NodeId> any(theta.begin(), theta.end());
  std::vector<std::discrete_distribution<std::size_t>> within;
  for (const auto& m : members) {
    std::vector<double> w;
    for (NodeId v : m) w.push_back(theta[v]);
    within.emplace_back(w.begin(), w.end());
  }
  std::set<Edge> edges;
  std::vector<std::vector<NodeId>> adj(n);
  auto add = [&](NodeId u, NodeId v) {
    if (u == v || !edges.insert({std::min(u, v), std::max(u, v)}).second) return;
    adj[u].push_back(v);
    adj[v].push_back(u);
  };
  const std::size_t target = 5278;
  while (edges.size() < target * 7 / 10) {
    const NodeId u = any(rng);
    const NodeId v = coin(rng) < 0.81 ? members[cls[u]][within[cls[u]](rng)] : any(rng);
    add(u, v);
  }
  while (edges.size() < target) {
    const NodeId u = static_cast<NodeId>(rng() % n);
    if (adj[u].size() < 2) continue;
    const auto a = adj[u][rng() % adj[u].size()], b = adj[u][rng() % adj[u].size()];
    add(a, b);
  }
  for (NodeId u = 0; u < n; ++u) {
    while (adj[u].empty()) add(u, members[cls[u]][within[cls[u]](rng)]);
  }
  std::filesystem::create_directories(dir);
  std::ofstream e(dir / "edges.txt"), l(dir / "labels.txt");
  for (auto [u, v] : edges) e << u << ' ' << v << '\n';
  for (NodeId u = 0; u < n; ++u) l << u << " c" << cls[u] << '\n';
}

using DenseCounts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

inline DenseCounts dense_adjacency(const Graph& g) {
  DenseCounts a = DenseCounts::Zero(g.num_nodes(), g.num_nodes());
  for (auto [u, v] : g.edge_list()) a(u, v) = a(v, u) = 1;
  return a;
}

/// Brute force over node triples: T(i, j) = #k forming a triangle with edge ij.
inline DenseCounts brute_force_triads(const Graph& g) {
  const auto a = dense_adjacency(g);
  const NodeId n = g.num_nodes();
  DenseCounts t = DenseCounts::Zero(n, n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      for (NodeId k = j + 1; k < n; ++k) {
        if (a(i, j) && a(j, k) && a(i, k)) {
          ++t(i, j), ++t(j, i);
          ++t(j, k), ++t(k, j);
          ++t(i, k), ++t(k, i);
        }
      }
    }
  }
  return t;
}

inline std::uint64_t brute_force_triangles(const Graph& g) {
  const auto a = dense_adjacency(g);
  std::uint64_t count = 0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    for (NodeId j = i + 1; j < g.num_nodes(); ++j) {
      for (NodeId k = j + 1; k < g.num_nodes(); ++k) {
        if (a(i, j) && a(j, k) && a(i, k)) ++count;
      }
    }
  }
  return count;
}

inline DenseCounts to_dense(const PairCounts& pc, NodeId n) {
  DenseCounts m = DenseCounts::Zero(n, n);
  for (const auto& e : pc.entries()) {
    m(e.i, e.j) = static_cast<std::int64_t>(e.count);
    m(e.j, e.i) = static_cast<std::int64_t>(e.count);
  }
  return m;
}

inline DenseCounts dense_membership(const Affiliations& aff) {
  DenseCounts r = DenseCounts::Zero(aff.num_nodes(), aff.num_communities());
  for (int c = 0; c < aff.num_communities(); ++c) {
    for (NodeId v : aff.members(c)) r(v, c) = 1;
  }
  return r;
}

}  // namespace rum::fixtures

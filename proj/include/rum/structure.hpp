#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "rum/graph.hpp"

namespace rum {

/// One stored entry of a sparse symmetric count matrix; always i < j.
struct PairCount {
  NodeId i;
  NodeId j;
  std::uint64_t count;

  friend bool operator==(const PairCount&, const PairCount&) = default;
};

/// Sparse symmetric non-negative integer matrix over unordered node pairs,
/// zero diagonal. Entries are sorted by (i, j) and strictly positive.
class PairCounts {
 public:
  PairCounts() = default;

  /// Packs an unordered pair into a sortable key (min in the high word).
  static std::uint64_t key(NodeId a, NodeId b) noexcept {
    auto lo = static_cast<std::uint64_t>(a < b ? a : b);
    auto hi = static_cast<std::uint64_t>(a < b ? b : a);
    return (lo << 32) | hi;
  }

  /// Counts occurrences of each key. Consumes `keys`.
  static PairCounts from_keys(std::vector<std::uint64_t> keys);
  /// Takes entries already sorted, unique and positive with i < j.
  static PairCounts from_sorted(std::vector<PairCount> entries);

  std::span<const PairCount> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Value at {a, b}; zero when absent or a == b.
  std::uint64_t at(NodeId a, NodeId b) const noexcept;
  /// Sum over stored (unordered) entries.
  std::uint64_t total() const noexcept;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;

 private:
  std::vector<PairCount> entries_;
};

/// T: for each edge, the number of triangles containing it.
PairCounts compute_triad_matrix(const Graph& graph);

/// Number of triangles, from T: each triangle is counted on its three edges.
std::uint64_t count_triangles(const PairCounts& triads);

/// Binary node-by-community incidence (overlap allowed).
class Affiliations {
 public:
  Affiliations() = default;
  /// Member lists are sorted and deduplicated; empty communities rejected.
  Affiliations(NodeId num_nodes, std::vector<std::vector<NodeId>> communities);

  NodeId num_nodes() const noexcept { return num_nodes_; }
  int num_communities() const noexcept {
    return static_cast<int>(communities_.size());
  }
  std::span<const NodeId> members(int c) const noexcept {
    return communities_[c];
  }
  const std::vector<std::vector<NodeId>>& communities() const noexcept {
    return communities_;
  }
  /// Communities of node v, ascending.
  std::vector<std::vector<int>> memberships() const;

  friend bool operator==(const Affiliations&, const Affiliations&) = default;

 private:
  NodeId num_nodes_ = 0;
  std::vector<std::vector<NodeId>> communities_;
};

/// One community per line, whitespace-separated node labels.
Affiliations read_affiliations(std::istream& in, const Graph& graph,
                               std::string_view source = "<stream>");
Affiliations load_affiliations(const std::filesystem::path& path,
                               const Graph& graph);
/// Canonical form: communities in order, members by ascending node index.
void write_affiliations(const Affiliations& aff, const Graph& graph,
                        std::ostream& out);

using InvolvementMatrix = Eigen::SparseMatrix<std::int64_t, Eigen::RowMajor>;
using ConditionalMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// S = A R: entry (j, c) counts neighbors of j inside community c.
InvolvementMatrix compute_involvement(const Graph& graph,
                                      const Affiliations& aff);

struct EmpiricalConditionals {
  ConditionalMatrix node_given_community;  // column-normalized S
  ConditionalMatrix community_given_node;  // row-normalized S
  std::size_t empty_columns = 0;
  std::size_t empty_rows = 0;
};

/// Diagnostic distributions; all-zero rows/columns stay zero and are counted.
EmpiricalConditionals empirical_conditionals(const InvolvementMatrix& s);

inline constexpr std::uint64_t kDefaultPairBudget = 100'000'000;

/// H = R R^T off the diagonal, by per-community pair expansion. Throws
/// CommunityTooLarge when a single community expands to more than
/// `pair_budget` pairs.
PairCounts compute_community_overlap(const Affiliations& aff,
                                     std::uint64_t pair_budget =
                                         kDefaultPairBudget);

/// Joint triad / community / co-occurrence counts for one node pair (i < j).
struct PairWeight {
  NodeId i;
  NodeId j;
  std::uint64_t t;
  std::uint64_t h;
  std::uint64_t w;

  friend bool operator==(const PairWeight&, const PairWeight&) = default;
};

class PairWeightTable {
 public:
  PairWeightTable() = default;
  explicit PairWeightTable(std::vector<PairWeight> entries)
      : entries_(std::move(entries)) {}

  std::span<const PairWeight> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Zero record when {a, b} is absent.
  PairWeight at(NodeId a, NodeId b) const noexcept;

  friend bool operator==(const PairWeightTable&,
                         const PairWeightTable&) = default;

 private:
  std::vector<PairWeight> entries_;
};

/// Union of supports; absent components are zero.
PairWeightTable merge_pair_weights(const PairCounts& t, const PairCounts& h,
                                   const PairCounts& w);

/// Debug dump, one "i j t h w" line per stored pair (internal indices).
void write_pair_weights(const PairWeightTable& table, std::ostream& out);

}  // namespace rum

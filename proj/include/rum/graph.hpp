#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rum {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph in CSR form with a stable external-label mapping.
///
/// Neighbor lists are sorted, duplicate-free and contain no self-loops; every
/// edge is stored in both directions. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph over `labels.size()` nodes. Edges may be given in either
  /// or both orientations and may repeat; self-loops are discarded.
  static Graph from_edges(std::vector<std::string> labels,
                          std::span<const Edge> edges);

  /// Same, with labels "0".."n-1".
  static Graph from_edges(NodeId n, std::span<const Edge> edges);

  NodeId num_nodes() const noexcept {
    return static_cast<NodeId>(labels_.size());
  }
  /// Number of undirected edges.
  std::size_t num_edges() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {adjacency_.data() + offsets_[v],
            adjacency_.data() + offsets_[v + 1]};
  }
  std::size_t degree(NodeId v) const noexcept {
    return offsets_[v + 1] - offsets_[v];
  }
  bool has_edge(NodeId u, NodeId v) const noexcept;

  const std::string& label(NodeId v) const noexcept { return labels_[v]; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> adjacency() const noexcept { return adjacency_; }

  /// Each undirected edge once, as (u, v) with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> adjacency_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
};

struct EdgeListOptions {
  bool deduplicate = true;
  bool drop_self_loops = true;
};

/// Reads a whitespace-separated edge list ('#' and '%' start comments).
///
/// Node indices are assigned in first-seen order among the retained edges.
/// With `deduplicate` or `drop_self_loops` disabled, a repeated edge or a
/// self-loop is rejected with ParseError instead of being cleaned.
Graph load_edge_list(const std::filesystem::path& path,
                     EdgeListOptions options = {});
Graph read_edge_list(std::istream& in, EdgeListOptions options = {},
                     std::string_view source = "<stream>");

/// Writes each undirected edge once as "label_u label_v".
void write_edge_list(const Graph& graph, std::ostream& out);

/// Class assignments for (a subset of) the graph's nodes. Multi-label allowed.
struct LabelTable {
  std::vector<std::vector<int>> labels;  // per node, sorted class ids
  std::vector<std::string> class_names;  // class id -> external name
  std::vector<std::string> skipped_nodes;  // listed but absent from graph

  int num_classes() const noexcept {
    return static_cast<int>(class_names.size());
  }
  bool is_labeled(NodeId v) const noexcept { return !labels[v].empty(); }
  std::vector<NodeId> labeled_nodes() const;
};

enum class UnknownNodePolicy { error, skip };

/// Reads "node class [class ...]" lines. A node may appear on several lines.
LabelTable load_labels(const std::filesystem::path& path, const Graph& graph,
                       UnknownNodePolicy policy = UnknownNodePolicy::error);
LabelTable read_labels(std::istream& in, const Graph& graph,
                       UnknownNodePolicy policy = UnknownNodePolicy::error,
                       std::string_view source = "<stream>");

std::map<std::size_t, std::size_t> degree_distribution(const Graph& graph);

/// 2|E| / n.
double mean_degree(const Graph& graph);

}  // namespace rum

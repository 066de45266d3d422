#include "rum/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "rum/error.hpp"
#include "text_util.hpp"

namespace rum {

Graph Graph::from_edges(std::vector<std::string> labels,
                        std::span<const Edge> edges) {
  Graph g;
  const auto n = static_cast<NodeId>(labels.size());
  std::vector<std::size_t> degree(static_cast<std::size_t>(n) + 1, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw std::out_of_range("Graph::from_edges: node index out of range");
    }
    if (u == v) continue;
    ++degree[u];
    ++degree[v];
  }
  g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (NodeId v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  std::vector<NodeId> raw(g.offsets_.back());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (auto [u, v] : edges) {
    if (u == v) continue;
    raw[cursor[u]++] = v;
    raw[cursor[v]++] = u;
  }
  // Sort and deduplicate each list, then compact.
  std::vector<std::size_t> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::size_t out = 0;
  for (NodeId v = 0; v < n; ++v) {
    auto first = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
    auto last = raw.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    for (auto it = first; it != last; ++it) raw[out++] = *it;
    offsets[v + 1] = out;
  }
  raw.resize(out);
  raw.shrink_to_fit();
  g.offsets_ = std::move(offsets);
  g.adjacency_ = std::move(raw);
  g.labels_ = std::move(labels);
  g.index_.reserve(g.labels_.size());
  for (NodeId v = 0; v < n; ++v) {
    if (!g.index_.emplace(g.labels_[v], v).second) {
      throw std::invalid_argument("Graph::from_edges: duplicate label '" +
                                  g.labels_[v] + "'");
    }
  }
  return g;
}

Graph Graph::from_edges(NodeId n, std::span<const Edge> edges) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) labels.push_back(std::to_string(v));
  return from_edges(std::move(labels), edges);
}

bool Graph::has_edge(NodeId u, NodeId v) const noexcept {
  auto nu = neighbors(u);
  return std::binary_search(nu.begin(), nu.end(), v);
}

std::optional<NodeId> Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> edges;
  edges.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) edges.emplace_back(u, v);
    }
  }
  return edges;
}

Graph read_edge_list(std::istream& in, EdgeListOptions options,
                     std::string_view source) {
  struct RawEdge {
    std::string a, b;
    std::size_t line;
  };
  std::vector<RawEdge> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    auto tokens = detail::split_ws(line);
    if (tokens.size() < 2) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 'source target', got '" +
                       std::string(detail::trim(line)) + "'");
    }
    if (tokens[0] == tokens[1]) {
      if (options.drop_self_loops) continue;
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": self-loop on '" + std::string(tokens[0]) + "'");
    }
    raw.push_back({std::string(tokens[0]), std::string(tokens[1]), line_no});
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source));

  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = index.emplace(s, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(s);
    return it->second;
  };
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (const auto& e : raw) {
    NodeId u = intern(e.a);
    NodeId v = intern(e.b);
    edges.emplace_back(u, v);
  }

  if (!options.deduplicate) {
    std::vector<std::pair<Edge, std::size_t>> keyed;
    keyed.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      auto [u, v] = edges[k];
      keyed.push_back({{std::min(u, v), std::max(u, v)}, raw[k].line});
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 1; k < keyed.size(); ++k) {
      if (keyed[k].first == keyed[k - 1].first) {
        throw ParseError(std::string(source) + ":" +
                         std::to_string(keyed[k].second) +
                         ": duplicate edge");
      }
    }
  }
  if (edges.empty()) throw EmptyGraph(std::string(source) + " has no edges");
  return Graph::from_edges(std::move(labels), edges);
}

Graph load_edge_list(const std::filesystem::path& path,
                     EdgeListOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path.string() + "'");
  return read_edge_list(in, options, path.string());
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  for (auto [u, v] : graph.edge_list()) {
    out << graph.label(u) << ' ' << graph.label(v) << '\n';
  }
}

std::vector<NodeId> LabelTable::labeled_nodes() const {
  std::vector<NodeId> nodes;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (!labels[v].empty()) nodes.push_back(static_cast<NodeId>(v));
  }
  return nodes;
}

LabelTable read_labels(std::istream& in, const Graph& graph,
                       UnknownNodePolicy policy, std::string_view source) {
  LabelTable table;
  table.labels.resize(static_cast<std::size_t>(graph.num_nodes()));
  std::unordered_map<std::string, int> class_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    auto tokens = detail::split_ws(line);
    if (tokens.size() < 2) {
      throw ParseError(std::string(source) + ":" + std::to_string(line_no) +
                       ": expected 'node class'");
    }
    auto node = graph.find(tokens[0]);
    if (!node) {
      if (policy == UnknownNodePolicy::error) {
        throw UnknownNode(std::string(source) + ":" + std::to_string(line_no) +
                          ": node '" + std::string(tokens[0]) +
                          "' is not in the graph");
      }
      table.skipped_nodes.emplace_back(tokens[0]);
      continue;
    }
    auto& classes = table.labels[*node];
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      auto [it, inserted] = class_index.emplace(
          std::string(tokens[t]), static_cast<int>(table.class_names.size()));
      if (inserted) table.class_names.emplace_back(tokens[t]);
      auto pos = std::lower_bound(classes.begin(), classes.end(), it->second);
      if (pos == classes.end() || *pos != it->second) {
        classes.insert(pos, it->second);
      }
    }
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source));
  std::sort(table.skipped_nodes.begin(), table.skipped_nodes.end());
  table.skipped_nodes.erase(
      std::unique(table.skipped_nodes.begin(), table.skipped_nodes.end()),
      table.skipped_nodes.end());
  return table;
}

LabelTable load_labels(const std::filesystem::path& path, const Graph& graph,
                       UnknownNodePolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file '" + path.string() + "'");
  return read_labels(in, graph, policy, path.string());
}

std::map<std::size_t, std::size_t> degree_distribution(const Graph& graph) {
  std::map<std::size_t, std::size_t> hist;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) ++hist[graph.degree(v)];
  return hist;
}

double mean_degree(const Graph& graph) {
  if (graph.num_nodes() == 0) return 0.0;
  return 2.0 * static_cast<double>(graph.num_edges()) / graph.num_nodes();
}

}  // namespace rum

#include "rum/structure.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "rum/error.hpp"
#include "text_util.hpp"

namespace rum {

PairCounts PairCounts::from_keys(std::vector<std::uint64_t> keys) {
  std::sort(keys.begin(), keys.end());
  PairCounts out;
  for (std::size_t k = 0; k < keys.size();) {
    std::size_t run = k;
    while (run < keys.size() && keys[run] == keys[k]) ++run;
    auto i = static_cast<NodeId>(keys[k] >> 32);
    auto j = static_cast<NodeId>(keys[k] & 0xffffffffULL);
    if (i != j) out.entries_.push_back({i, j, run - k});
    k = run;
  }
  return out;
}

PairCounts PairCounts::from_sorted(std::vector<PairCount> entries) {
  PairCounts out;
  out.entries_ = std::move(entries);
  return out;
}

std::uint64_t PairCounts::at(NodeId a, NodeId b) const noexcept {
  if (a == b) return 0;
  PairCount probe{std::min(a, b), std::max(a, b), 0};
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), probe,
      [](const PairCount& x, const PairCount& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
      });
  if (it == entries_.end() || it->i != probe.i || it->j != probe.j) return 0;
  return it->count;
}

std::uint64_t PairCounts::total() const noexcept {
  std::uint64_t sum = 0;
  for (const auto& e : entries_) sum += e.count;
  return sum;
}

PairCounts compute_triad_matrix(const Graph& graph) {
  std::vector<PairCount> entries;
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    auto nu = graph.neighbors(u);
    for (NodeId v : nu) {
      if (v <= u) continue;
      auto nv = graph.neighbors(v);
      // Sorted-list intersection of the two neighborhoods.
      std::uint64_t common = 0;
      auto a = nu.begin();
      auto b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++common;
          ++a;
          ++b;
        }
      }
      if (common > 0) entries.push_back({u, v, common});
    }
  }
  return PairCounts::from_sorted(std::move(entries));
}

std::uint64_t count_triangles(const PairCounts& triads) {
  return triads.total() / 3;
}

Affiliations::Affiliations(NodeId num_nodes,
                           std::vector<std::vector<NodeId>> communities)
    : num_nodes_(num_nodes), communities_(std::move(communities)) {
  for (auto& members : communities_) {
    if (members.empty()) {
      throw std::invalid_argument("Affiliations: empty community");
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.front() < 0 || members.back() >= num_nodes_) {
      throw std::out_of_range("Affiliations: node index out of range");
    }
  }
}

std::vector<std::vector<int>> Affiliations::memberships() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_nodes_));
  for (int c = 0; c < num_communities(); ++c) {
    for (NodeId v : communities_[c]) out[v].push_back(c);
  }
  return out;
}

Affiliations read_affiliations(std::istream& in, const Graph& graph,
                               std::string_view source) {
  std::vector<std::vector<NodeId>> communities;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    std::vector<NodeId> members;
    for (auto token : detail::split_ws(line)) {
      auto v = graph.find(token);
      if (!v) {
        throw ImportFormatError(std::string(source) + ":" +
                                std::to_string(line_no) + ": node '" +
                                std::string(token) + "' is not in the graph");
      }
      members.push_back(*v);
    }
    communities.push_back(std::move(members));
  }
  if (in.bad()) throw IoError("read failure on " + std::string(source));
  return Affiliations(graph.num_nodes(), std::move(communities));
}

Affiliations load_affiliations(const std::filesystem::path& path,
                               const Graph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open affiliation file '" + path.string() + "'");
  return read_affiliations(in, graph, path.string());
}

void write_affiliations(const Affiliations& aff, const Graph& graph,
                        std::ostream& out) {
  for (const auto& members : aff.communities()) {
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (k) out << ' ';
      out << graph.label(members[k]);
    }
    out << '\n';
  }
}

InvolvementMatrix compute_involvement(const Graph& graph,
                                      const Affiliations& aff) {
  if (aff.num_nodes() != graph.num_nodes()) {
    throw DimensionMismatch("affiliations cover " +
                            std::to_string(aff.num_nodes()) +
                            " nodes, graph has " +
                            std::to_string(graph.num_nodes()));
  }
  const auto membership = aff.memberships();
  std::vector<Eigen::Triplet<std::int64_t>> triplets;
  std::vector<std::int64_t> row(static_cast<std::size_t>(aff.num_communities()),
                                0);
  std::vector<int> touched;
  for (NodeId j = 0; j < graph.num_nodes(); ++j) {
    for (NodeId k : graph.neighbors(j)) {
      for (int c : membership[k]) {
        if (row[c]++ == 0) touched.push_back(c);
      }
    }
    for (int c : touched) {
      triplets.emplace_back(j, c, row[c]);
      row[c] = 0;
    }
    touched.clear();
  }
  InvolvementMatrix s(graph.num_nodes(), aff.num_communities());
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

EmpiricalConditionals empirical_conditionals(const InvolvementMatrix& s) {
  Eigen::VectorXd col_sum = Eigen::VectorXd::Zero(s.cols());
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(s.rows());
  for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
    for (InvolvementMatrix::InnerIterator it(s, r); it; ++it) {
      col_sum[it.col()] += static_cast<double>(it.value());
      row_sum[it.row()] += static_cast<double>(it.value());
    }
  }
  std::vector<Eigen::Triplet<double>> by_col, by_row;
  for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
    for (InvolvementMatrix::InnerIterator it(s, r); it; ++it) {
      if (it.value() == 0) continue;
      auto value = static_cast<double>(it.value());
      by_col.emplace_back(it.row(), it.col(), value / col_sum[it.col()]);
      by_row.emplace_back(it.row(), it.col(), value / row_sum[it.row()]);
    }
  }
  EmpiricalConditionals out;
  out.node_given_community.resize(s.rows(), s.cols());
  out.node_given_community.setFromTriplets(by_col.begin(), by_col.end());
  out.community_given_node.resize(s.rows(), s.cols());
  out.community_given_node.setFromTriplets(by_row.begin(), by_row.end());
  out.empty_columns = static_cast<std::size_t>((col_sum.array() == 0).count());
  out.empty_rows = static_cast<std::size_t>((row_sum.array() == 0).count());
  return out;
}

PairCounts compute_community_overlap(const Affiliations& aff,
                                     std::uint64_t pair_budget) {
  std::uint64_t total_pairs = 0;
  for (int c = 0; c < aff.num_communities(); ++c) {
    std::uint64_t size = aff.members(c).size();
    std::uint64_t pairs = size * (size - 1) / 2;
    if (pairs > pair_budget) {
      throw CommunityTooLarge("community " + std::to_string(c) + " has " +
                              std::to_string(size) + " members (" +
                              std::to_string(pairs) + " pairs, budget " +
                              std::to_string(pair_budget) + ")");
    }
    total_pairs += pairs;
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(total_pairs);
  for (int c = 0; c < aff.num_communities(); ++c) {
    auto members = aff.members(c);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        keys.push_back(PairCounts::key(members[a], members[b]));
      }
    }
  }
  return PairCounts::from_keys(std::move(keys));
}

PairWeight PairWeightTable::at(NodeId a, NodeId b) const noexcept {
  NodeId i = std::min(a, b), j = std::max(a, b);
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair{i, j},
                             [](const PairWeight& x, std::pair<NodeId, NodeId> y) {
                               return x.i != y.first ? x.i < y.first
                                                     : x.j < y.second;
                             });
  if (a == b || it == entries_.end() || it->i != i || it->j != j) {
    return {i, j, 0, 0, 0};
  }
  return *it;
}

PairWeightTable merge_pair_weights(const PairCounts& t, const PairCounts& h,
                                   const PairCounts& w) {
  auto et = t.entries(), eh = h.entries(), ew = w.entries();
  std::size_t a = 0, b = 0, c = 0;
  auto less = [](const PairCount& x, const PairCount& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  };
  std::vector<PairWeight> merged;
  merged.reserve(std::max({et.size(), eh.size(), ew.size()}));
  while (a < et.size() || b < eh.size() || c < ew.size()) {
    // Smallest pending key across the three streams.
    const PairCount* next = nullptr;
    if (a < et.size()) next = &et[a];
    if (b < eh.size() && (!next || less(eh[b], *next))) next = &eh[b];
    if (c < ew.size() && (!next || less(ew[c], *next))) next = &ew[c];
    PairWeight rec{next->i, next->j, 0, 0, 0};
    auto matches = [&](const PairCount& x) {
      return x.i == rec.i && x.j == rec.j;
    };
    if (a < et.size() && matches(et[a])) rec.t = et[a++].count;
    if (b < eh.size() && matches(eh[b])) rec.h = eh[b++].count;
    if (c < ew.size() && matches(ew[c])) rec.w = ew[c++].count;
    merged.push_back(rec);
  }
  return PairWeightTable(std::move(merged));
}

void write_pair_weights(const PairWeightTable& table, std::ostream& out) {
  for (const auto& p : table.entries()) {
    out << p.i << ' ' << p.j << ' ' << p.t << ' ' << p.h << ' ' << p.w << '\n';
  }
}

}  // namespace rum

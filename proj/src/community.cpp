#include "rum/community.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <thread>

#include "rum/error.hpp"
#include "rum/random.hpp"

namespace rum {

namespace {

using RowD = Eigen::RowVectorXd;

// log(1 - exp(-s)) with s floored.
double edge_term(double s, double floor) {
  return std::log(-std::expm1(-std::max(s, floor)));
}

// d/ds [log(1 - exp(-s)) + s] = 1 / (1 - exp(-s)), evaluated at max(s, floor).
double edge_gain(double s, double floor) {
  return 1.0 / -std::expm1(-std::max(s, floor));
}

template <typename Scalar>
RowD row_sum(const FactorMatrix<Scalar>& f) {
  return f.template cast<double>().colwise().sum();
}

// Terms of L(F) that involve row u, as a function of a candidate row x.
// `background` is the sum of rows of non-neighbors of u (excluding u).
template <typename Neighbors>
double local_likelihood(const RowD& x, const Neighbors& neighbor_rows,
                        const RowD& background, double floor) {
  double value = -x.dot(background);
  for (const auto& fv : neighbor_rows) value += edge_term(x.dot(fv), floor);
  return value;
}

template <typename Scalar, typename ReadRow>
bool update_row(NodeId u, const Graph& graph, ReadRow&& read_row,
                FactorMatrix<Scalar>& f, RowD& sum_f,
                const BigClamConfig& cfg) {
  const RowD x = f.row(u).template cast<double>();
  std::vector<RowD> neighbor_rows;
  neighbor_rows.reserve(graph.degree(u));
  RowD sum_nb = RowD::Zero(x.size());
  for (NodeId v : graph.neighbors(u)) {
    neighbor_rows.push_back(read_row(v));
    sum_nb += neighbor_rows.back();
  }
  const RowD others = sum_f - x;
  const RowD background = others - sum_nb;

  RowD grad = -others;
  for (const auto& fv : neighbor_rows) {
    grad += edge_gain(x.dot(fv), cfg.edge_floor) * fv;
  }
  if (!grad.allFinite() || grad.isZero(0.0)) return false;

  const double before = local_likelihood(x, neighbor_rows, background,
                                         cfg.edge_floor);
  double step = cfg.step_init;
  for (int k = 0; k < cfg.max_backtracks; ++k, step *= cfg.step_backtrack) {
    RowD candidate = (x + step * grad).cwiseMax(0.0);
    // Round through Scalar so the accepted value is the stored one.
    candidate = candidate.template cast<Scalar>().template cast<double>();
    if (!candidate.allFinite()) continue;
    const double moved = grad.dot(candidate - x);
    if (moved <= 0) continue;
    const double after = local_likelihood(candidate, neighbor_rows, background,
                                          cfg.edge_floor);
    if (after >= before + cfg.armijo * moved) {
      sum_f += candidate - x;
      f.row(u) = candidate.template cast<Scalar>();
      return true;
    }
  }
  return false;
}

template <typename Scalar>
void sequential_sweep(const Graph& graph, FactorMatrix<Scalar>& f,
                      const BigClamConfig& cfg) {
  RowD sum_f = row_sum(f);
  auto read = [&f](NodeId v) -> RowD { return f.row(v).template cast<double>(); };
  for (NodeId u = 0; u < graph.num_nodes(); ++u) {
    update_row(u, graph, read, f, sum_f, cfg);
  }
}

// Rows are split into contiguous blocks updated concurrently. Each block sees
// its own rows live and every other row as of the start of the sweep.
template <typename Scalar>
void block_sweep(const Graph& graph, FactorMatrix<Scalar>& f,
                 const BigClamConfig& cfg) {
  const FactorMatrix<Scalar> snapshot = f;
  const RowD snapshot_sum = row_sum(snapshot);
  const NodeId n = graph.num_nodes();
  const int blocks = std::min<int>(cfg.threads, n);
  std::vector<std::thread> workers;
  for (int b = 0; b < blocks; ++b) {
    const NodeId lo = static_cast<NodeId>(static_cast<std::int64_t>(n) * b / blocks);
    const NodeId hi =
        static_cast<NodeId>(static_cast<std::int64_t>(n) * (b + 1) / blocks);
    workers.emplace_back([&, lo, hi] {
      RowD sum_f = snapshot_sum;
      auto read = [&](NodeId v) -> RowD {
        return (v >= lo && v < hi) ? RowD(f.row(v).template cast<double>())
                                   : RowD(snapshot.row(v).template cast<double>());
      };
      for (NodeId u = lo; u < hi; ++u) update_row(u, graph, read, f, sum_f, cfg);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

void validate(const BigClamConfig& cfg) {
  if (cfg.num_communities < 0) throw ConfigError("bigclam.m must be >= 1");
  if (!(cfg.tol > 0)) throw ConfigError("bigclam.tol must be > 0");
  if (!(cfg.step_backtrack > 0 && cfg.step_backtrack < 1)) {
    throw ConfigError("bigclam.step_backtrack must lie in (0, 1)");
  }
  if (!(cfg.step_init > 0)) throw ConfigError("bigclam.step_init must be > 0");
  if (cfg.max_iters < 1) throw ConfigError("bigclam.max_iters must be >= 1");
  if (cfg.threshold < 0) throw ConfigError("bigclam.threshold must be >= 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

double default_threshold(NodeId num_nodes) {
  if (num_nodes < 2) return 0.0;
  return std::sqrt(-std::log1p(-1.0 / num_nodes));
}

int default_num_communities(NodeId num_nodes, int num_classes) {
  if (num_classes > 0) return num_classes;
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(double(num_nodes)))));
}

template <typename Scalar>
Scalar edge_probability(const FactorMatrix<Scalar>& f, NodeId i, NodeId j) {
  return static_cast<Scalar>(-std::expm1(-double(f.row(i).dot(f.row(j)))));
}

template <typename Scalar>
LogLikelihood<Scalar> log_likelihood(const Graph& graph,
                                     const FactorMatrix<Scalar>& f,
                                     double edge_floor) {
  LogLikelihood<Scalar> out;
  const auto fd = f.template cast<double>().eval();
  double edge_sum = 0;
  double edge_inner = 0;
  for (auto [u, v] : graph.edge_list()) {
    double s = fd.row(u).dot(fd.row(v));
    if (s < edge_floor) ++out.clamped_edges;
    edge_sum += edge_term(s, edge_floor);
    edge_inner += s;
  }
  // Sum over all unordered pairs u != v of <F_u, F_v>.
  const RowD total = fd.colwise().sum();
  const double all_pairs = 0.5 * (total.squaredNorm() - fd.squaredNorm());
  out.value = static_cast<Scalar>(edge_sum - (all_pairs - edge_inner));
  return out;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> log_likelihood_gradient(
    const Graph& graph, const FactorMatrix<Scalar>& f, NodeId v,
    double edge_floor) {
  const RowD x = f.row(v).template cast<double>();
  RowD grad = -(row_sum(f) - x);
  for (NodeId w : graph.neighbors(v)) {
    const RowD fw = f.row(w).template cast<double>();
    grad += edge_gain(x.dot(fw), edge_floor) * fw;
  }
  return grad.cast<Scalar>();
}

template <typename Scalar>
BigClamResult<Scalar> fit_bigclam(const Graph& graph,
                                  const BigClamConfig& cfg) {
  validate(cfg);
  const NodeId n = graph.num_nodes();
  if (graph.num_edges() == 0) throw EmptyGraph("bigclam needs at least one edge");
  const int m = cfg.num_communities > 0 ? cfg.num_communities
                                        : default_num_communities(n);

  BigClamResult<Scalar> result;
  result.threshold = cfg.threshold > 0 ? cfg.threshold : default_threshold(n);
  auto& f = result.factors;
  f.resize(n, m);
  Rng rng(derive_seed(cfg.seed, 0xb16c1a3));
  const double scale = 1.0 / std::sqrt(double(m));
  for (Eigen::Index r = 0; r < f.rows(); ++r) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      f(r, c) = static_cast<Scalar>(uniform01(rng) * scale);
    }
  }

  double current = log_likelihood(graph, f, cfg.edge_floor).value;
  result.trace.push_back(current);
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    if (cfg.threads > 1) {
      const FactorMatrix<Scalar> before = f;
      block_sweep(graph, f, cfg);
      // Concurrent block updates can interfere; fall back to a sequential
      // sweep whenever they did not improve the likelihood.
      if (double(log_likelihood(graph, f, cfg.edge_floor).value) < current) {
        f = before;
        sequential_sweep(graph, f, cfg);
      }
    } else {
      sequential_sweep(graph, f, cfg);
    }
    const double next = log_likelihood(graph, f, cfg.edge_floor).value;
    result.trace.push_back(next);
    result.sweeps = sweep + 1;
    const double gain = (next - current) / std::max(std::abs(current), 1e-300);
    current = next;
    if (gain < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  std::vector<std::vector<NodeId>> communities;
  for (int c = 0; c < m; ++c) {
    std::vector<NodeId> members;
    for (NodeId v = 0; v < n; ++v) {
      if (double(f(v, c)) >= result.threshold) members.push_back(v);
    }
    if (members.empty()) {
      ++result.dropped_communities;
    } else {
      communities.push_back(std::move(members));
    }
  }
  if (communities.empty()) {
    throw NoCommunitiesFound("every affiliation fell below threshold " +
                             std::to_string(result.threshold));
  }
  result.affiliations = Affiliations(n, std::move(communities));
  return result;
}

Affiliations connected_components(const Graph& graph) {
  const NodeId n = graph.num_nodes();
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<NodeId>> communities;
  for (NodeId s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    const int id = static_cast<int>(communities.size());
    communities.emplace_back();
    std::queue<NodeId> frontier;
    frontier.push(s);
    component[s] = id;
    while (!frontier.empty()) {
      NodeId u = frontier.front();
      frontier.pop();
      communities[id].push_back(u);
      for (NodeId v : graph.neighbors(u)) {
        if (component[v] < 0) {
          component[v] = id;
          frontier.push(v);
        }
      }
    }
  }
  return Affiliations(n, std::move(communities));
}

std::string DetectStrategy::to_string() const {
  switch (kind) {
    case Kind::bigclam:
      return bigclam.num_communities > 0
                 ? "bigclam:m=" + std::to_string(bigclam.num_communities)
                 : "bigclam";
    case Kind::import:
      return "import:" + import_path.string();
    case Kind::connected_components:
      return "cc";
  }
  return {};
}

DetectStrategy parse_strategy(std::string_view spec, BigClamConfig base) {
  DetectStrategy s;
  s.bigclam = base;
  if (spec == "cc") {
    s.kind = DetectStrategy::Kind::connected_components;
  } else if (spec.starts_with("import:")) {
    s.kind = DetectStrategy::Kind::import;
    s.import_path = std::string(spec.substr(7));
    if (s.import_path.empty()) throw ConfigError("import strategy needs a path");
  } else if (spec == "bigclam") {
    s.kind = DetectStrategy::Kind::bigclam;
  } else if (spec.starts_with("bigclam:m=")) {
    s.kind = DetectStrategy::Kind::bigclam;
    auto digits = spec.substr(10);
    int m = 0;
    auto [ptr, ec] =
        std::from_chars(digits.data(), digits.data() + digits.size(), m);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || m < 1) {
      throw ConfigError("bad community count in '" + std::string(spec) + "'");
    }
    s.bigclam.num_communities = m;
  } else {
    throw ConfigError("unknown community strategy '" + std::string(spec) +
                      "' (expected bigclam[:m=K], import:PATH or cc)");
  }
  return s;
}

Affiliations detect(const Graph& graph, const DetectStrategy& strategy) {
  switch (strategy.kind) {
    case DetectStrategy::Kind::bigclam:
      return fit_bigclam<double>(graph, strategy.bigclam).affiliations;
    case DetectStrategy::Kind::import:
      return load_affiliations(strategy.import_path, graph);
    case DetectStrategy::Kind::connected_components:
      return connected_components(graph);
  }
  throw std::logic_error("unreachable");
}

template float edge_probability(const FactorMatrix<float>&, NodeId, NodeId);
template double edge_probability(const FactorMatrix<double>&, NodeId, NodeId);
template LogLikelihood<float> log_likelihood(const Graph&,
                                             const FactorMatrix<float>&,
                                             double);
template LogLikelihood<double> log_likelihood(const Graph&,
                                              const FactorMatrix<double>&,
                                              double);
template Eigen::Matrix<float, 1, Eigen::Dynamic> log_likelihood_gradient(
    const Graph&, const FactorMatrix<float>&, NodeId, double);
template Eigen::Matrix<double, 1, Eigen::Dynamic> log_likelihood_gradient(
    const Graph&, const FactorMatrix<double>&, NodeId, double);
template BigClamResult<float> fit_bigclam(const Graph&, const BigClamConfig&);
template BigClamResult<double> fit_bigclam(const Graph&, const BigClamConfig&);

}  // namespace rum

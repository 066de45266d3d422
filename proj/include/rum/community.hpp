#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rum/graph.hpp"
#include "rum/structure.hpp"

namespace rum {

/// Non-negative node-by-community affiliation strengths, one row per node.
template <typename Scalar>
using FactorMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BigClamConfig {
  int num_communities = 0;  // 0: resolved by default_num_communities
  int max_iters = 100;      // full sweeps over all node rows
  double step_init = 1.0;
  double step_backtrack = 0.3;
  int max_backtracks = 10;
  double armijo = 0.05;     // sufficient-increase constant
  double tol = 1e-4;        // relative log-likelihood improvement per sweep
  double threshold = 0.0;   // membership cutoff; 0: default_threshold(n)
  double edge_floor = 1e-10;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Throws ConfigError when the configuration is unusable.
void validate(const BigClamConfig& cfg);

/// sqrt(-log(1 - 1/n)): the affiliation at which an edge is as likely as a
/// background edge.
double default_threshold(NodeId num_nodes);

/// Number of classes when known, otherwise ceil(sqrt(n)).
int default_num_communities(NodeId num_nodes, int num_classes = 0);

/// 1 - exp(-<F_i, F_j>).
template <typename Scalar>
Scalar edge_probability(const FactorMatrix<Scalar>& f, NodeId i, NodeId j);

template <typename Scalar>
struct LogLikelihood {
  Scalar value = 0;
  /// Edges whose inner product fell below the floor and were clamped.
  std::size_t clamped_edges = 0;
};

/// Sum over edges of log(1 - exp(-<F_u,F_v>)) minus the sum over non-edges of
/// <F_u,F_v>, each unordered pair once. The non-edge term uses the aggregate
/// row sum, so the cost is O(|E| m + n m).
template <typename Scalar>
LogLikelihood<Scalar> log_likelihood(const Graph& graph,
                                     const FactorMatrix<Scalar>& f,
                                     double edge_floor = 1e-10);

/// d L / d F_v (row vector of length m). Exact wherever no incident edge is
/// below the floor; below it the unclamped derivative at the floor is used.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> log_likelihood_gradient(
    const Graph& graph, const FactorMatrix<Scalar>& f, NodeId v,
    double edge_floor = 1e-10);

template <typename Scalar>
struct BigClamResult {
  FactorMatrix<Scalar> factors;
  Affiliations affiliations;
  std::vector<double> trace;  // L(F) at init and after every sweep
  int sweeps = 0;
  bool converged = false;
  int dropped_communities = 0;
  double threshold = 0;
};

/// Projected per-row gradient ascent with backtracking on L(F).
///
/// Throws NoCommunitiesFound when thresholding leaves every community empty.
template <typename Scalar>
BigClamResult<Scalar> fit_bigclam(const Graph& graph, const BigClamConfig& cfg);

/// One community per connected component.
Affiliations connected_components(const Graph& graph);

/// Parsed form of "bigclam[:m=K]", "import:PATH" or "cc".
struct DetectStrategy {
  enum class Kind { bigclam, import, connected_components };
  Kind kind = Kind::bigclam;
  BigClamConfig bigclam;
  std::filesystem::path import_path;

  std::string to_string() const;
};

DetectStrategy parse_strategy(std::string_view spec,
                              BigClamConfig base = {});

Affiliations detect(const Graph& graph, const DetectStrategy& strategy);

extern template float edge_probability(const FactorMatrix<float>&, NodeId,
                                       NodeId);
extern template double edge_probability(const FactorMatrix<double>&, NodeId,
                                        NodeId);
extern template LogLikelihood<float> log_likelihood(const Graph&,
                                                    const FactorMatrix<float>&,
                                                    double);
extern template LogLikelihood<double> log_likelihood(
    const Graph&, const FactorMatrix<double>&, double);
extern template Eigen::Matrix<float, 1, Eigen::Dynamic> log_likelihood_gradient(
    const Graph&, const FactorMatrix<float>&, NodeId, double);
extern template Eigen::Matrix<double, 1, Eigen::Dynamic>
log_likelihood_gradient(const Graph&, const FactorMatrix<double>&, NodeId,
                        double);
extern template BigClamResult<float> fit_bigclam(const Graph&,
                                                 const BigClamConfig&);
extern template BigClamResult<double> fit_bigclam(const Graph&,
                                                  const BigClamConfig&);

}  // namespace rum

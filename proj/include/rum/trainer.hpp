#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rum/graph.hpp"
#include "rum/random.hpp"
#include "rum/structure.hpp"

namespace rum {

/// Node vectors, one row per node.
template <typename Scalar>
using EmbeddingMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SamplingMode {
  weighted_pass,     // every positive pair once per epoch, gradient scaled by
                     // its combined weight
  sample_by_weight,  // pairs drawn with probability proportional to weight,
                     // unit gradient scale
};

struct TrainConfig {
  int dim = 128;
  double alpha = 1.0;  // triad weight
  double beta = 1.0;   // shared-community weight
  int epochs = 5;
  int negatives = 5;  // per positive sample
  double lr_init = 0.025;
  double lr_final = 0.0001;
  double sigmoid_clip = 6.0;
  double max_weight = 0.0;  // cap on the combined pair weight; 0: none
  SamplingMode mode = SamplingMode::sample_by_weight;
  std::uint64_t samples_per_epoch = 0;  // sample_by_weight only; 0: support
  double divergence_norm = 1e3;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Throws ConfigError when the configuration is unusable.
void validate(const TrainConfig& cfg);

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

/// sigma(clamp(<u_i, u_j>, -clip, clip)).
template <typename Scalar>
double pair_similarity(const EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j,
                       double clip = 6.0) {
  const double x = static_cast<double>(u.row(i).dot(u.row(j)));
  return sigmoid(std::clamp(x, -clip, clip));
}

/// Negative-sampling distribution over nodes, mass proportional to
/// degree^power. Zero-degree nodes are never drawn.
class NoiseSampler {
 public:
  explicit NoiseSampler(const Graph& graph, double power = 0.75);

  NodeId sample(Rng& rng) const;
  double probability(NodeId v) const;
  std::size_t support_size() const noexcept { return nodes_.size(); }

 private:
  std::vector<NodeId> nodes_;
  std::vector<double> cumulative_;  // ends at 1
  std::vector<double> mass_;        // per node, normalized
};

struct PositiveSample {
  NodeId i;
  NodeId j;
  double weight;
};

/// Positive pairs with combined weight alpha*t + beta*h + w > 0.
class PositiveSampleStream {
 public:
  /// Throws EmptyTrainingSet when no pair has positive weight.
  PositiveSampleStream(const PairWeightTable& pairs, const TrainConfig& cfg);

  std::span<const PositiveSample> support() const noexcept { return support_; }
  std::size_t samples_per_epoch() const noexcept { return per_epoch_; }
  double total_weight() const noexcept { return total_weight_; }

  /// Samples for one epoch. weighted_pass: a seeded shuffle of the support;
  /// sample_by_weight: weight-proportional draws with unit weight. Each
  /// sample's orientation (which endpoint receives negatives) is randomized.
  std::vector<PositiveSample> epoch(int index) const;

 private:
  std::vector<PositiveSample> support_;
  std::vector<double> cumulative_;
  SamplingMode mode_;
  std::size_t per_epoch_ = 0;
  double total_weight_ = 0;
  std::uint64_t seed_;
};

/// Negative-sampled loss for one positive pair:
///   -weight * log sigma(<u_i,u_j>) - sum_k log sigma(-<u_i,u_k>).
template <typename Scalar>
double sampled_objective(const EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j,
                         double weight, std::span<const NodeId> negatives,
                         double clip = 6.0);

/// One descent step on sampled_objective. All gradients use the vectors as
/// they were before the step.
template <typename Scalar>
void sgd_step(EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j, double weight,
              std::span<const NodeId> negatives, double lr, double clip = 6.0);

/// Entries uniform in (-0.5/d, 0.5/d), seeded from cfg.seed.
template <typename Scalar>
EmbeddingMatrix<Scalar> initial_embedding(NodeId num_nodes,
                                          const TrainConfig& cfg);

struct TrainStats {
  std::uint64_t steps = 0;
  std::uint64_t skipped_negatives = 0;
  std::size_t positive_pairs = 0;
  std::vector<double> epoch_max_norm;
};

/// Throws EmptyTrainingSet or DivergenceDetected (a row norm exceeded
/// cfg.divergence_norm or became non-finite).
template <typename Scalar>
EmbeddingMatrix<Scalar> train(const Graph& graph, const PairWeightTable& pairs,
                              const TrainConfig& cfg,
                              TrainStats* stats = nullptr);

#define RUM_TRAINER_EXTERN(Scalar)                                            \
  extern template double sampled_objective(const EmbeddingMatrix<Scalar>&,   \
                                           NodeId, NodeId, double,            \
                                           std::span<const NodeId>, double);  \
  extern template void sgd_step(EmbeddingMatrix<Scalar>&, NodeId, NodeId,     \
                                double, std::span<const NodeId>, double,      \
                                double);                                      \
  extern template EmbeddingMatrix<Scalar> initial_embedding(NodeId,           \
                                                            const TrainConfig&); \
  extern template EmbeddingMatrix<Scalar> train(const Graph&,                 \
                                                const PairWeightTable&,       \
                                                const TrainConfig&, TrainStats*);
RUM_TRAINER_EXTERN(float)
RUM_TRAINER_EXTERN(double)
#undef RUM_TRAINER_EXTERN

}  // namespace rum

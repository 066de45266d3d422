#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rum/graph.hpp"
#include "rum/trainer.hpp"

namespace rum {

struct LogRegConfig {
  double c = 1.0;  // inverse L2 strength: penalty is |w|^2 / (2c)
  int max_iters = 200;
  double tol = 1e-6;  // on the gradient norm
};

/// One-vs-rest logistic regression. Column k of `weights` holds class k's
/// coefficients followed by its bias.
template <typename Scalar>
struct ClassifierModel {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> weights;
  std::vector<bool> trained;  // classes seen in training; others never win
  LogRegConfig config;

  int num_classes() const noexcept { return static_cast<int>(trained.size()); }

  /// Decision values, one column per class; untrained classes get -inf.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> scores(
      const EmbeddingMatrix<Scalar>& features) const;

  /// Highest-scoring class per row, or the `counts[r]` highest when counts
  /// are given (multi-label prediction). Ties go to the lower class id.
  std::vector<std::vector<int>> predict(
      const EmbeddingMatrix<Scalar>& features,
      std::span<const int> counts = {}) const;
};

/// Fits one L2-regularized binary model per class (row r of `features` has
/// the classes in labels[r]) by accelerated full-batch gradient descent.
/// Throws SingleClassSplit when fewer than two classes occur.
template <typename Scalar>
ClassifierModel<Scalar> fit_logreg_ovr(const EmbeddingMatrix<Scalar>& features,
                                       std::span<const std::vector<int>> labels,
                                       int num_classes,
                                       const LogRegConfig& cfg = {});

struct F1Scores {
  double micro = 0;
  double macro = 0;
};

/// Micro F1 pools TP/FP/FN over classes; macro F1 averages per-class F1 over
/// the classes present in the truth or the predictions.
F1Scores f1_scores(std::span<const std::vector<int>> truth,
                   std::span<const std::vector<int>> predicted,
                   int num_classes);

struct ClassifyConfig {
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int repetitions = 5;
  LogRegConfig logreg;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Throws ConfigError when the configuration is unusable.
void validate(const ClassifyConfig& cfg);

struct ClassificationCell {
  double ratio;
  int repetition;
  double micro_f1;
  double macro_f1;
  bool stratified;
};

struct RatioSummary {
  double ratio;
  double micro_mean, micro_std;
  double macro_mean, macro_std;
};

struct ReconstructionResult {
  double map = 0;
  std::size_t scored_nodes = 0;
  std::size_t skipped_nodes = 0;  // isolated
};

struct EvalReport {
  std::vector<ClassificationCell> cells;  // ordered by (ratio, repetition)
  std::vector<RatioSummary> summary;
  std::optional<ReconstructionResult> reconstruction;
  std::vector<std::string> warnings;
};

/// Repeated random train/test splits at each ratio over the labeled nodes.
template <typename Scalar>
EvalReport classify_and_score(const EmbeddingMatrix<Scalar>& u,
                              const LabelTable& labels,
                              const ClassifyConfig& cfg);

/// Average precision of a ranked candidate list against a relevant set,
/// truncated at k = |relevant|: mean of precision-at-hit over the hits found
/// in the top k, or 0 without hits. `relevant` must be sorted.
double truncated_average_precision(std::span<const NodeId> ranking,
                                   std::span<const NodeId> relevant);

/// For every non-isolated node, ranks all other nodes by Euclidean distance
/// (ties by index) and scores the true neighbors. MAP over scored nodes.
template <typename Scalar>
ReconstructionResult reconstruct_and_score(const EmbeddingMatrix<Scalar>& u,
                                           const Graph& graph, int threads = 1);

void write_report_text(const EvalReport& report, std::ostream& out);
/// Tab-separated "task ratio repetition metric value" records with header.
void write_report_records(const EvalReport& report, std::ostream& out);

#define RUM_EVAL_EXTERN(Scalar)                                                \
  extern template struct ClassifierModel<Scalar>;                              \
  extern template ClassifierModel<Scalar> fit_logreg_ovr(                      \
      const EmbeddingMatrix<Scalar>&, std::span<const std::vector<int>>, int,  \
      const LogRegConfig&);                                                    \
  extern template EvalReport classify_and_score(const EmbeddingMatrix<Scalar>&, \
                                                const LabelTable&,             \
                                                const ClassifyConfig&);        \
  extern template ReconstructionResult reconstruct_and_score(                  \
      const EmbeddingMatrix<Scalar>&, const Graph&, int);
RUM_EVAL_EXTERN(float)
RUM_EVAL_EXTERN(double)
#undef RUM_EVAL_EXTERN

}  // namespace rum

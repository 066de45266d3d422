#include "rum/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "rum/error.hpp"
#include "rum/random.hpp"
#include "text_util.hpp"

namespace rum {

namespace {

using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;

// Runs fn(k) for k in [0, count) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const auto workers_n = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers_n <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < workers_n; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t k = t; k < count; k += workers_n) fn(k);
    });
  }
  for (auto& w : workers) w.join();
}

// Features with a trailing column of ones for the bias.
template <typename Scalar>
MatrixXd augment(const EmbeddingMatrix<Scalar>& x) {
  MatrixXd xa(x.rows(), x.cols() + 1);
  xa.leftCols(x.cols()) = x.template cast<double>();
  xa.col(x.cols()).setOnes();
  return xa;
}

// Minimizes sum_r log(1 + exp(-y_r z_r)) + |w_features|^2 / (2c) with
// Nesterov-accelerated gradient descent, step 1/L, and gradient restarts.
VectorXd fit_binary(const MatrixXd& xa, const VectorXd& y, const LogRegConfig& cfg,
                    double lipschitz) {
  const Eigen::Index dim = xa.cols();
  const Eigen::Index features = dim - 1;
  auto gradient = [&](const VectorXd& w) {
    VectorXd margin = y.cwiseProduct(xa * w);
    VectorXd coeff = -y.cwiseProduct(
        margin.unaryExpr([](double m) { return 1.0 / (1.0 + std::exp(m)); }));
    VectorXd g = xa.transpose() * coeff;
    g.head(features) += w.head(features) / cfg.c;
    return g;
  };
  VectorXd w = VectorXd::Zero(dim);
  VectorXd v = w;
  double t = 1.0;
  const double step = 1.0 / lipschitz;
  for (int it = 0; it < cfg.max_iters; ++it) {
    VectorXd g = gradient(v);
    if (g.norm() < cfg.tol) {
      w = v;
      break;
    }
    VectorXd next = v - step * g;
    if (g.dot(next - w) > 0) {
      t = 1.0;  // momentum is pointing uphill
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    v = next + ((t - 1.0) / t_next) * (next - w);
    w = std::move(next);
    t = t_next;
  }
  return w;
}

double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

struct Split {
  std::vector<NodeId> train, test;
  bool stratified = true;
};

Split make_split(const LabelTable& labels, std::span<const NodeId> nodes,
                 double ratio, Rng& rng) {
  Split split;
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(labels.num_classes()));
  for (NodeId v : nodes) by_class[labels.labels[v].front()].push_back(v);
  bool can_stratify = true;
  for (const auto& group : by_class) {
    if (group.size() == 1) can_stratify = false;
  }
  if (can_stratify) {
    for (auto& group : by_class) {
      if (group.empty()) continue;
      shuffle(std::span(group), rng);
      auto take = static_cast<std::size_t>(std::llround(ratio * double(group.size())));
      take = std::clamp<std::size_t>(take, 1, group.size() - 1);
      split.train.insert(split.train.end(), group.begin(), group.begin() + take);
      split.test.insert(split.test.end(), group.begin() + take, group.end());
    }
  } else {
    split.stratified = false;
    std::vector<NodeId> all(nodes.begin(), nodes.end());
    shuffle(std::span(all), rng);
    auto take = static_cast<std::size_t>(std::llround(ratio * double(all.size())));
    take = std::clamp<std::size_t>(take, 1, all.size() - 1);
    split.train.assign(all.begin(), all.begin() + take);
    split.test.assign(all.begin() + take, all.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

template <typename Scalar>
EmbeddingMatrix<Scalar> gather_rows(const EmbeddingMatrix<Scalar>& u,
                                    std::span<const NodeId> rows) {
  EmbeddingMatrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), u.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = u.row(rows[r]);
  }
  return out;
}

}  // namespace

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ClassifierModel<Scalar>::scores(
    const EmbeddingMatrix<Scalar>& features) const {
  MatrixXd s = augment(features) * weights.template cast<double>();
  for (int c = 0; c < num_classes(); ++c) {
    if (!trained[c]) s.col(c).setConstant(-std::numeric_limits<double>::infinity());
  }
  return s.cast<Scalar>();
}

template <typename Scalar>
std::vector<std::vector<int>> ClassifierModel<Scalar>::predict(
    const EmbeddingMatrix<Scalar>& features, std::span<const int> counts) const {
  const auto s = scores(features);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(s.rows()));
  std::vector<int> order(static_cast<std::size_t>(num_classes()));
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s(r, a) > s(r, b); });
    std::size_t take = counts.empty() ? 1 : static_cast<std::size_t>(counts[r]);
    take = std::min(take, order.size());
    out[r].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(out[r].begin(), out[r].end());
  }
  return out;
}

template <typename Scalar>
ClassifierModel<Scalar> fit_logreg_ovr(const EmbeddingMatrix<Scalar>& features,
                                       std::span<const std::vector<int>> labels,
                                       int num_classes, const LogRegConfig& cfg) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DimensionMismatch("feature rows and label rows differ");
  }
  ClassifierModel<Scalar> model;
  model.config = cfg;
  model.trained.assign(static_cast<std::size_t>(num_classes), false);
  for (const auto& ls : labels) {
    for (int c : ls) model.trained[c] = true;
  }
  const auto present = std::count(model.trained.begin(), model.trained.end(), true);
  if (present < 2) {
    throw SingleClassSplit("training split contains " + std::to_string(present) +
                           " class(es); need at least 2");
  }

  const MatrixXd xa = augment(features);
  const MatrixXd gram = xa.transpose() * xa;
  const double top = Eigen::SelfAdjointEigenSolver<MatrixXd>(gram, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  const double lipschitz = 0.25 * top + 1.0 / cfg.c;

  model.weights.setZero(xa.cols(), num_classes);
  for (int c = 0; c < num_classes; ++c) {
    if (!model.trained[c]) continue;
    VectorXd y(xa.rows());
    for (Eigen::Index r = 0; r < xa.rows(); ++r) {
      const auto& ls = labels[static_cast<std::size_t>(r)];
      y[r] = std::binary_search(ls.begin(), ls.end(), c) ? 1.0 : -1.0;
    }
    model.weights.col(c) = fit_binary(xa, y, cfg, lipschitz).cast<Scalar>();
  }
  return model;
}

F1Scores f1_scores(std::span<const std::vector<int>> truth,
                   std::span<const std::vector<int>> predicted, int num_classes) {
  std::vector<std::size_t> tp(static_cast<std::size_t>(num_classes), 0),
      fp(tp), fn(tp);
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const auto& t = truth[r];
    const auto& p = predicted[r];
    for (int c : p) {
      (std::binary_search(t.begin(), t.end(), c) ? tp : fp)[c]++;
    }
    for (int c : t) {
      if (!std::binary_search(p.begin(), p.end(), c)) fn[c]++;
    }
  }
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  double macro_sum = 0;
  int macro_count = 0;
  for (int c = 0; c < num_classes; ++c) {
    all_tp += tp[c];
    all_fp += fp[c];
    all_fn += fn[c];
    if (tp[c] + fp[c] + fn[c] == 0) continue;  // absent from truth and predictions
    macro_sum += safe_div(2.0 * tp[c], 2.0 * tp[c] + fp[c] + fn[c]);
    ++macro_count;
  }
  F1Scores out;
  out.micro = safe_div(2.0 * all_tp, 2.0 * all_tp + all_fp + all_fn);
  out.macro = macro_count ? macro_sum / macro_count : 0.0;
  return out;
}

void validate(const ClassifyConfig& cfg) {
  if (cfg.ratios.empty()) throw ConfigError("eval.ratios is empty");
  for (double r : cfg.ratios) {
    if (!(r > 0 && r < 1)) throw ConfigError("eval.ratios must lie in (0, 1)");
  }
  if (cfg.repetitions < 1) throw ConfigError("eval.repetitions must be >= 1");
  if (!(cfg.logreg.c > 0)) throw ConfigError("eval.c must be > 0");
  if (cfg.logreg.max_iters < 1) throw ConfigError("eval.max_iters must be >= 1");
}

template <typename Scalar>
EvalReport classify_and_score(const EmbeddingMatrix<Scalar>& u,
                              const LabelTable& labels, const ClassifyConfig& cfg) {
  validate(cfg);
  if (static_cast<std::size_t>(u.rows()) != labels.labels.size()) {
    throw DimensionMismatch("embedding rows and label table size differ");
  }
  const auto nodes = labels.labeled_nodes();
  if (nodes.size() < 2) throw SingleClassSplit("fewer than two labeled nodes");

  EvalReport report;
  const std::size_t reps = static_cast<std::size_t>(cfg.repetitions);
  report.cells.resize(cfg.ratios.size() * reps);
  std::vector<std::string> errors(report.cells.size());
  parallel_for(report.cells.size(), cfg.threads, [&](std::size_t k) {
    const std::size_t q = k / reps;
    const int rep = static_cast<int>(k % reps);
    Rng rng(derive_seed(cfg.seed, q, static_cast<std::uint64_t>(rep)));
    const Split split = make_split(labels, nodes, cfg.ratios[q], rng);
    std::vector<std::vector<int>> train_labels, test_labels;
    for (NodeId v : split.train) train_labels.push_back(labels.labels[v]);
    std::vector<int> counts;
    for (NodeId v : split.test) {
      test_labels.push_back(labels.labels[v]);
      counts.push_back(static_cast<int>(labels.labels[v].size()));
    }
    try {
      const auto model = fit_logreg_ovr(gather_rows(u, split.train),
                                        std::span<const std::vector<int>>(train_labels),
                                        labels.num_classes(), cfg.logreg);
      const auto predicted = model.predict(gather_rows(u, split.test), counts);
      const auto f1 = f1_scores(test_labels, predicted, labels.num_classes());
      report.cells[k] = {cfg.ratios[q], rep, f1.micro, f1.macro, split.stratified};
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw SingleClassSplit(e);
  }

  for (std::size_t q = 0; q < cfg.ratios.size(); ++q) {
    RatioSummary s{cfg.ratios[q], 0, 0, 0, 0};
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& cell = report.cells[q * reps + r];
      s.micro_mean += cell.micro_f1;
      s.macro_mean += cell.macro_f1;
      if (!cell.stratified && r == 0) {
        report.warnings.push_back("ratio " + std::to_string(cfg.ratios[q]) +
                                  ": a class has a single member; split is not "
                                  "stratified");
      }
    }
    s.micro_mean /= double(reps);
    s.macro_mean /= double(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& cell = report.cells[q * reps + r];
      s.micro_std += (cell.micro_f1 - s.micro_mean) * (cell.micro_f1 - s.micro_mean);
      s.macro_std += (cell.macro_f1 - s.macro_mean) * (cell.macro_f1 - s.macro_mean);
    }
    s.micro_std = std::sqrt(s.micro_std / double(reps));
    s.macro_std = std::sqrt(s.macro_std / double(reps));
    report.summary.push_back(s);
  }
  return report;
}

double truncated_average_precision(std::span<const NodeId> ranking,
                                   std::span<const NodeId> relevant) {
  const std::size_t k = std::min(relevant.size(), ranking.size());
  std::size_t hits = 0;
  double sum = 0;
  for (std::size_t r = 0; r < k; ++r) {
    if (std::binary_search(relevant.begin(), relevant.end(), ranking[r])) {
      ++hits;
      sum += double(hits) / double(r + 1);
    }
  }
  return hits ? sum / double(hits) : 0.0;
}

template <typename Scalar>
ReconstructionResult reconstruct_and_score(const EmbeddingMatrix<Scalar>& u,
                                           const Graph& graph, int threads) {
  if (u.rows() != graph.num_nodes()) {
    throw DimensionMismatch("embedding rows and graph size differ");
  }
  const NodeId n = graph.num_nodes();
  const Eigen::MatrixXd x = u.template cast<double>();
  std::vector<double> ap(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const auto i = static_cast<NodeId>(idx);
    const std::size_t k = graph.degree(i);
    if (k == 0) return;
    std::vector<std::pair<double, NodeId>> candidates;
    candidates.reserve(static_cast<std::size_t>(n) - 1);
    for (NodeId j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back((x.row(i) - x.row(j)).squaredNorm(), j);
    }
    const std::size_t top = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(top),
                      candidates.end());
    std::vector<NodeId> ranking(top);
    for (std::size_t r = 0; r < top; ++r) ranking[r] = candidates[r].second;
    ap[idx] = truncated_average_precision(ranking, graph.neighbors(i));
  });
  ReconstructionResult result;
  double sum = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (graph.degree(v) == 0) {
      ++result.skipped_nodes;
    } else {
      ++result.scored_nodes;
      sum += ap[v];
    }
  }
  result.map = result.scored_nodes ? sum / double(result.scored_nodes) : 0.0;
  return result;
}

void write_report_text(const EvalReport& report, std::ostream& out) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::fixed << std::setprecision(4);
  if (!report.summary.empty()) {
    out << "ratio   micro_f1          macro_f1\n";
    for (const auto& s : report.summary) {
      out << std::setw(5) << std::setprecision(2) << s.ratio << std::setprecision(4)
          << "   " << s.micro_mean << " +- " << s.micro_std << "   " << s.macro_mean
          << " +- " << s.macro_std << '\n';
    }
  }
  if (report.reconstruction) {
    const auto& r = *report.reconstruction;
    out << "reconstruction MAP " << r.map << " over " << r.scored_nodes << " nodes";
    if (r.skipped_nodes) out << " (" << r.skipped_nodes << " isolated skipped)";
    out << '\n';
  }
  for (const auto& w : report.warnings) out << "warning: " << w << '\n';
  out.flags(flags);
  out.precision(precision);
}

void write_report_records(const EvalReport& report, std::ostream& out) {
  std::string line = "task\tratio\trepetition\tmetric\tvalue\n";
  for (const auto& c : report.cells) {
    for (auto [metric, value] : {std::pair{"micro_f1", c.micro_f1},
                                 std::pair{"macro_f1", c.macro_f1}}) {
      line += "classify\t";
      detail::append_number(line, c.ratio);
      line += '\t' + std::to_string(c.repetition) + '\t' + metric + '\t';
      detail::append_number(line, value);
      line += '\n';
    }
  }
  if (report.reconstruction) {
    line += "reconstruct\t-\t-\tmap\t";
    detail::append_number(line, report.reconstruction->map);
    line += '\n';
  }
  out << line;
}

#define RUM_EVAL_INSTANTIATE(Scalar)                                           \
  template struct ClassifierModel<Scalar>;                                     \
  template ClassifierModel<Scalar> fit_logreg_ovr(                             \
      const EmbeddingMatrix<Scalar>&, std::span<const std::vector<int>>, int,  \
      const LogRegConfig&);                                                    \
  template EvalReport classify_and_score(const EmbeddingMatrix<Scalar>&,       \
                                         const LabelTable&,                    \
                                         const ClassifyConfig&);               \
  template ReconstructionResult reconstruct_and_score(                         \
      const EmbeddingMatrix<Scalar>&, const Graph&, int);
RUM_EVAL_INSTANTIATE(float)
RUM_EVAL_INSTANTIATE(double)
#undef RUM_EVAL_INSTANTIATE

}  // namespace rum

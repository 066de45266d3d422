#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/QR>

#include "rum/error.hpp"
#include "rum/eval.hpp"
#include "support/fixtures.hpp"

using namespace rum;

namespace {

using Labels = std::vector<std::vector<int>>;

LabelTable single_labels(const std::vector<int>& classes, int num_classes) {
  LabelTable t;
  for (int c : classes) t.labels.push_back({c});
  for (int c = 0; c < num_classes; ++c) t.class_names.push_back("c" + std::to_string(c));
  return t;
}

// Full stable sort by distance; AP over the first k positions.
double oracle_map(const EmbeddingMatrix<double>& u, const Graph& g) {
  double sum = 0;
  int scored = 0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) == 0) continue;
    std::vector<NodeId> order;
    for (NodeId j = 0; j < g.num_nodes(); ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return (u.row(i) - u.row(a)).squaredNorm() < (u.row(i) - u.row(b)).squaredNorm();
    });
    double ap = 0;
    int hits = 0;
    for (std::size_t r = 0; r < g.degree(i); ++r) {
      if (g.has_edge(i, order[r])) ap += double(++hits) / double(r + 1);
    }
    sum += hits ? ap / hits : 0;
    ++scored;
  }
  return sum / scored;
}

EmbeddingMatrix<double> blobs(const std::vector<Eigen::Vector2d>& centers, int per_class,
                              double spread, std::uint64_t seed, std::vector<int>& classes) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  EmbeddingMatrix<double> x(static_cast<Eigen::Index>(centers.size()) * per_class, 2);
  classes.clear();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int k = 0; k < per_class; ++k) {
      const auto r = static_cast<Eigen::Index>(classes.size());
      x(r, 0) = centers[c].x() + noise(rng);
      x(r, 1) = centers[c].y() + noise(rng);
      classes.push_back(static_cast<int>(c));
    }
  }
  return x;
}

double accuracy(const std::vector<std::vector<int>>& predicted, const std::vector<int>& truth) {
  int correct = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) correct += predicted[k] == std::vector<int>{truth[k]};
  return double(correct) / double(truth.size());
}

}  // namespace

TEST(F1, PerfectPredictions) {
  Labels truth{{0}, {1}, {2}, {1}};
  auto f1 = f1_scores(truth, truth, 3);
  EXPECT_DOUBLE_EQ(f1.micro, 1.0);
  EXPECT_DOUBLE_EQ(f1.macro, 1.0);
}

TEST(F1, HandComputedBinaryConfusion) {
  // Class A: TP 1, FP 1, FN 1. Class B: TP 1, FP 1, FN 1.
  Labels truth{{0}, {0}, {1}, {1}};
  Labels predicted{{0}, {1}, {1}, {0}};
  auto f1 = f1_scores(truth, predicted, 2);
  EXPECT_DOUBLE_EQ(f1.micro, 0.5);
  EXPECT_DOUBLE_EQ(f1.macro, 0.5);
}

TEST(F1, MicroAndMacroDiffer) {
  // Class 0: TP 3, FN 1. Class 1: TP 0, FP 1. Class 2: absent everywhere.
  Labels truth{{0}, {0}, {0}, {0}};
  Labels predicted{{0}, {0}, {0}, {1}};
  auto f1 = f1_scores(truth, predicted, 3);
  EXPECT_DOUBLE_EQ(f1.micro, 6.0 / 8.0);
  EXPECT_DOUBLE_EQ(f1.macro, (6.0 / 7.0 + 0.0) / 2.0);
}

TEST(F1, DroppingACorrectPredictionLowersMicro) {
  Labels truth{{0}, {1}, {2}, {0}, {1}};
  Labels predicted = truth;
  const double full = f1_scores(truth, predicted, 3).micro;
  predicted[3].clear();
  EXPECT_LT(f1_scores(truth, predicted, 3).micro, full);
}

TEST(F1, MacroInvariantUnderRelabeling) {
  Labels truth{{0}, {1}, {2}, {0}, {1}, {2}, {2}};
  Labels predicted{{0}, {2}, {2}, {1}, {1}, {0}, {2}};
  const int perm[] = {2, 0, 1};
  Labels t2, p2;
  for (const auto& l : truth) t2.push_back({perm[l[0]]});
  for (const auto& l : predicted) p2.push_back({perm[l[0]]});
  EXPECT_DOUBLE_EQ(f1_scores(truth, predicted, 3).macro, f1_scores(t2, p2, 3).macro);
}

TEST(LogReg, SeparableTwoClass) {
  std::vector<int> classes;
  auto x = blobs({{1, 0}, {-1, 0}}, 30, 0.1, 1, classes);
  Labels labels;
  for (int c : classes) labels.push_back({c});
  auto model = fit_logreg_ovr(x, std::span<const std::vector<int>>(labels), 2);
  EXPECT_DOUBLE_EQ(accuracy(model.predict(x), classes), 1.0);
  EXPECT_TRUE(model.weights.allFinite());
  EXPECT_EQ(model.weights.rows(), 3);
}

TEST(LogReg, IdenticalFeaturesPredictMajority) {
  EmbeddingMatrix<double> x = EmbeddingMatrix<double>::Constant(10, 3, 0.5);
  Labels labels{{1}, {1}, {1}, {0}, {1}, {2}, {1}, {0}, {1}, {1}};
  auto model = fit_logreg_ovr(x, std::span<const std::vector<int>>(labels), 3);
  for (const auto& p : model.predict(x)) EXPECT_EQ(p, std::vector<int>{1});
}

TEST(LogReg, ThreeBlobsMatchGridSearchedSeparator) {
  std::vector<int> classes;
  const double r = 2.0;
  std::vector<Eigen::Vector2d> centers;
  for (int c = 0; c < 3; ++c) {
    const double a = 2 * M_PI * c / 3;
    centers.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  auto x = blobs(centers, 67, 0.6, 5, classes);
  x.conservativeResize(200, 2);
  classes.resize(200);
  Labels labels;
  for (int c : classes) labels.push_back({c});
  auto model = fit_logreg_ovr(x, std::span<const std::vector<int>>(labels), 3);
  const double fitted = accuracy(model.predict(x), classes);

  // Brute force: argmax over three linear scores with unit directions on a
  // 5-degree grid and biases on a coarse grid.
  double best = 0;
  for (int a1 = 0; a1 < 72; a1 += 1) {
    for (int a2 = 0; a2 < 72; a2 += 1) {
      for (double b1 : {-0.5, 0.0, 0.5}) {
        const double t[3] = {0.0, a1 * M_PI / 36, a2 * M_PI / 36};
        const double b[3] = {0.0, b1, 0.0};
        int correct = 0;
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
          int arg = 0;
          double top = -1e300;
          for (int c = 0; c < 3; ++c) {
            const double s = std::cos(t[c]) * x(k, 0) + std::sin(t[c]) * x(k, 1) + b[c];
            if (s > top) top = s, arg = c;
          }
          correct += arg == classes[k];
        }
        best = std::max(best, double(correct) / double(x.rows()));
      }
    }
  }
  EXPECT_GE(fitted, 0.95);
  EXPECT_GE(fitted, best - 0.02);
}

TEST(LogReg, SingleClassRejected) {
  EmbeddingMatrix<double> x = EmbeddingMatrix<double>::Random(4, 2);
  Labels labels{{1}, {1}, {1}, {1}};
  EXPECT_THROW(fit_logreg_ovr(x, std::span<const std::vector<int>>(labels), 3), SingleClassSplit);
}

TEST(LogReg, UntrainedClassNeverPredicted) {
  std::vector<int> classes;
  auto x = blobs({{1, 0}, {-1, 0}}, 10, 0.1, 2, classes);
  Labels labels;
  for (int c : classes) labels.push_back({c});
  auto model = fit_logreg_ovr(x, std::span<const std::vector<int>>(labels), 3);
  EXPECT_FALSE(model.trained[2]);
  std::vector<int> counts(x.rows(), 2);
  for (const auto& p : model.predict(x, counts)) {
    EXPECT_EQ(p.size(), 2u);
    EXPECT_EQ(std::count(p.begin(), p.end(), 2), 0);
  }
}

TEST(Classify, OneHotEmbeddingsScorePerfectly) {
  std::vector<int> classes;
  for (int k = 0; k < 60; ++k) classes.push_back(k % 4);
  EmbeddingMatrix<double> u = EmbeddingMatrix<double>::Zero(60, 4);
  for (int k = 0; k < 60; ++k) u(k, classes[k]) = 1.0;
  ClassifyConfig cfg;
  auto report = classify_and_score(u, single_labels(classes, 4), cfg);
  ASSERT_EQ(report.cells.size(), 45u);
  for (const auto& c : report.cells) {
    EXPECT_DOUBLE_EQ(c.micro_f1, 1.0);
    EXPECT_DOUBLE_EQ(c.macro_f1, 1.0);
    EXPECT_TRUE(c.stratified);
  }
  ASSERT_EQ(report.summary.size(), 9u);
  EXPECT_DOUBLE_EQ(report.summary[4].micro_std, 0.0);
}

TEST(Classify, ReproducibleAndThreadIndependent) {
  std::vector<int> classes;
  auto x = blobs({{1, 0}, {-1, 0}, {0, 1}}, 30, 0.8, 3, classes);
  auto labels = single_labels(classes, 3);
  ClassifyConfig cfg;
  cfg.ratios = {0.3, 0.7};
  cfg.seed = 4;
  auto a = classify_and_score(x, labels, cfg);
  cfg.threads = 3;
  auto b = classify_and_score(x, labels, cfg);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t k = 0; k < a.cells.size(); ++k) {
    EXPECT_EQ(a.cells[k].micro_f1, b.cells[k].micro_f1);
    EXPECT_EQ(a.cells[k].macro_f1, b.cells[k].macro_f1);
  }
}

TEST(Classify, SingletonClassFallsBackToUnstratified) {
  std::vector<int> classes(20, 0);
  for (int k = 10; k < 19; ++k) classes[k] = 1;
  classes[19] = 2;
  EmbeddingMatrix<double> u = EmbeddingMatrix<double>::Zero(20, 3);
  for (int k = 0; k < 20; ++k) u(k, classes[k]) = 1.0;
  ClassifyConfig cfg;
  cfg.ratios = {0.5};
  auto report = classify_and_score(u, single_labels(classes, 3), cfg);
  EXPECT_FALSE(report.cells[0].stratified);
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Classify, UnlabeledNodesAreIgnored) {
  std::vector<int> classes;
  for (int k = 0; k < 40; ++k) classes.push_back(k % 2);
  auto labels = single_labels(classes, 2);
  labels.labels.push_back({});
  EmbeddingMatrix<double> u = EmbeddingMatrix<double>::Zero(41, 2);
  for (int k = 0; k < 40; ++k) u(k, classes[k]) = 1.0;
  ClassifyConfig cfg;
  cfg.ratios = {0.5};
  auto report = classify_and_score(u, labels, cfg);
  EXPECT_DOUBLE_EQ(report.summary[0].micro_mean, 1.0);
}

TEST(Classify, InvalidRatios) {
  ClassifyConfig cfg;
  cfg.ratios = {0.0};
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg.ratios = {1.0};
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(AveragePrecision, TruncatedAtRelevantCount) {
  std::vector<NodeId> relevant{2, 5};
  EXPECT_DOUBLE_EQ(truncated_average_precision(std::vector<NodeId>{2, 5, 1}, relevant), 1.0);
  EXPECT_DOUBLE_EQ(truncated_average_precision(std::vector<NodeId>{1, 5, 2}, relevant), 0.5);
  EXPECT_DOUBLE_EQ(truncated_average_precision(std::vector<NodeId>{1, 3, 2}, relevant), 0.0);
}

TEST(Reconstruction, NearestNeighborsAreTrueNeighbors) {
  // Two far-apart triangles plus an isolated node: each node's two nearest
  // points are exactly its neighbors.
  auto g = Graph::from_edges(7, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  EmbeddingMatrix<double> u(7, 2);
  u << 0, 0, 1, 0, 0, 1, 50, 50, 51, 50, 50, 51, 200, 200;
  auto r = reconstruct_and_score(u, g);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(r.scored_nodes, 6u);
  EXPECT_EQ(r.skipped_nodes, 1u);
}

TEST(Reconstruction, MatchesFullSortOracle) {
  auto g = fixtures::gnp(60, 0.08, 3);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  EmbeddingMatrix<double> u(60, 5);
  for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = nd(rng);
  EXPECT_NEAR(reconstruct_and_score(u, g).map, oracle_map(u, g), 1e-12);
}

TEST(Reconstruction, IdenticalPointsUseIndexOrder) {
  auto g = fixtures::gnp(30, 0.1, 8);
  EmbeddingMatrix<double> u = EmbeddingMatrix<double>::Ones(30, 3);
  const double first = reconstruct_and_score(u, g).map;
  EXPECT_EQ(first, reconstruct_and_score(u, g, 4).map);
  EXPECT_NEAR(first, oracle_map(u, g), 1e-12);
}

TEST(Reconstruction, InvariantUnderIsometry) {
  auto g = fixtures::gnp(80, 0.06, 4);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  EmbeddingMatrix<double> u(80, 6);
  for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = nd(rng);
  Eigen::MatrixXd a(6, 6);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = nd(rng);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  Eigen::RowVectorXd shift(6);
  for (Eigen::Index k = 0; k < 6; ++k) shift(k) = 10 * nd(rng);
  EmbeddingMatrix<double> moved = (u * q).rowwise() + shift;
  EXPECT_EQ(reconstruct_and_score(u, g).map, reconstruct_and_score(moved, g).map);
}

TEST(Report, RecordsAndText) {
  EvalReport report;
  report.cells.push_back({0.5, 0, 0.75, 0.5, true});
  report.summary.push_back({0.5, 0.75, 0, 0.5, 0});
  report.reconstruction = ReconstructionResult{0.25, 3, 0};
  std::ostringstream tsv;
  write_report_records(report, tsv);
  EXPECT_EQ(tsv.str(),
            "task\tratio\trepetition\tmetric\tvalue\n"
            "classify\t0.5\t0\tmicro_f1\t0.75\n"
            "classify\t0.5\t0\tmacro_f1\t0.5\n"
            "reconstruct\t-\t-\tmap\t0.25\n");
  std::ostringstream text;
  write_report_text(report, text);
  EXPECT_NE(text.str().find("0.7500"), std::string::npos);
  EXPECT_NE(text.str().find("reconstruction MAP 0.2500"), std::string::npos);
}

// End-to-end run on a generated citation-like graph (2708 nodes, 7 classes).
// A stand-in for the real benchmark, not a substitute for it.

#include <gtest/gtest.h>

#include "rum/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace rum;
namespace fx = rum::fixtures;

namespace {

class SyntheticCitation : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new std::filesystem::path(fx::scratch_dir("synthetic_citation"));
    fx::write_citation_like(*data_ / "graph", 1);
  }
  static void TearDownTestSuite() { delete data_; }

  static PipelineConfig config(const std::string& out) {
    PipelineConfig cfg;
    cfg.edges = *data_ / "graph" / "edges.txt";
    cfg.labels = *data_ / "graph" / "labels.txt";
    cfg.output_dir = *data_ / out;
    cfg.eval.ratios = {0.5, 0.9};
    return cfg;
  }

  static double micro_at(const EvalReport& r, double ratio) {
    for (const auto& s : r.summary) {
      if (std::abs(s.ratio - ratio) < 1e-9) return s.micro_mean;
    }
    return -1;
  }

  static std::filesystem::path* data_;
};

std::filesystem::path* SyntheticCitation::data_ = nullptr;

TEST_F(SyntheticCitation, ClassificationAndReconstructionQuality) {
  auto cfg = config("full");
  auto summary = cmd_embed(cfg);
  EXPECT_EQ(summary.nodes, 2708u);
  EXPECT_GT(summary.triangles, 0u);
  EXPECT_GT(summary.communities, 0);

  auto classify = cmd_eval(cfg, summary.embedding_path, EvalTask::classify);
  EXPECT_GE(micro_at(classify, 0.5), 0.78);
  EXPECT_GE(micro_at(classify, 0.9), 0.78);

  auto rec = cmd_eval(cfg, summary.embedding_path, EvalTask::reconstruct).reconstruction;
  ASSERT_TRUE(rec.has_value());
  EXPECT_GE(rec->map, 0.55);
}

TEST_F(SyntheticCitation, RepeatedRunsAreByteIdentical) {
  auto a = cmd_embed(config("repeat_a"));
  auto b = cmd_embed(config("repeat_b"));
  EXPECT_EQ(fx::read_file(a.embedding_path), fx::read_file(b.embedding_path));
  EXPECT_EQ(a.manifest["outputs"], b.manifest["outputs"]);
}

TEST_F(SyntheticCitation, HigherOrderTermsChangeTheEmbedding) {
  auto full = cmd_embed(config("terms_full"));
  auto cfg = config("terms_off");
  cfg.train.alpha = cfg.train.beta = 0;
  auto reduced = cmd_embed(cfg);
  EXPECT_NE(fx::read_file(full.embedding_path), fx::read_file(reduced.embedding_path));
}

}  // namespace

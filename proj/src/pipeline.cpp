#include "rum/pipeline.hpp"

#include <fstream>
#include <optional>
#include <sstream>

#include "rum/community.hpp"
#include "rum/embedding_io.hpp"
#include "rum/graph.hpp"
#include "rum/structure.hpp"
#include "rum/trainer.hpp"
#include "rum/walker.hpp"
#include "text_util.hpp"

namespace rum {

namespace {

template <typename F>
auto run_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) out[k] = digits[v & 0xf];
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct Inputs {
  Graph graph;
  std::optional<LabelTable> labels;
};

Inputs load_inputs(const PipelineConfig& cfg, bool need_labels) {
  return run_stage("load", [&] {
    if (cfg.edges.empty()) throw ConfigError("input.edges is required");
    Inputs in{load_edge_list(cfg.edges), std::nullopt};
    if (!cfg.labels.empty()) {
      in.labels = load_labels(cfg.labels, in.graph, UnknownNodePolicy::skip);
    } else if (need_labels) {
      throw ConfigError("input.labels is required for this task");
    }
    return in;
  });
}

struct CommunityOutcome {
  Affiliations affiliations;
  std::string strategy;
  int dropped = 0;
  int sweeps = 0;
  bool converged = true;
  double threshold = 0;
  std::optional<double> final_likelihood;
};

CommunityOutcome find_communities(const PipelineConfig& cfg, const Inputs& in) {
  return run_stage("communities", [&] {
    DetectStrategy strategy = parse_strategy(cfg.community_strategy, cfg.bigclam);
    CommunityOutcome out;
    if (strategy.kind == DetectStrategy::Kind::bigclam) {
      if (strategy.bigclam.num_communities == 0) {
        strategy.bigclam.num_communities = default_num_communities(
            in.graph.num_nodes(), in.labels ? in.labels->num_classes() : 0);
      }
      auto fit = fit_bigclam<double>(in.graph, strategy.bigclam);
      out.affiliations = std::move(fit.affiliations);
      out.dropped = fit.dropped_communities;
      out.sweeps = fit.sweeps;
      out.converged = fit.converged;
      out.threshold = fit.threshold;
      if (!fit.trace.empty()) out.final_likelihood = fit.trace.back();
    } else {
      out.affiliations = detect(in.graph, strategy);
    }
    out.strategy = strategy.to_string();
    return out;
  });
}

struct PairOutcome {
  PairCounts triads;
  CommunityOutcome communities;
  PairCounts overlap;
  PairCounts cooccurrence;
  PairWeightTable pairs;
};

PairOutcome build_pairs(const PipelineConfig& cfg, const Inputs& in) {
  PairOutcome out;
  out.triads = run_stage("triads", [&] { return compute_triad_matrix(in.graph); });
  out.communities = find_communities(cfg, in);
  out.overlap = run_stage("communities", [&] {
    return compute_community_overlap(out.communities.affiliations, cfg.pair_budget);
  });
  out.cooccurrence = run_stage("walks", [&] {
    validate(cfg.walk);
    return count_cooccurrences(generate_walks(in.graph, cfg.walk), cfg.walk.window,
                               cfg.walk.binary);
  });
  out.pairs = run_stage("merge", [&] {
    return merge_pair_weights(out.triads, out.overlap, out.cooccurrence);
  });
  return out;
}

nlohmann::json input_record(const std::filesystem::path& path) {
  if (path.empty()) return nullptr;
  return {{"path", path.string()}, {"fnv1a64", file_checksum(path)}};
}

}  // namespace

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::uint64_t h = detail::fnv1a({});
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = detail::fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

EmbedSummary cmd_embed(PipelineConfig cfg) {
  cfg.resolve();
  run_stage("config", [&] {
    validate(cfg.train);
    validate(cfg.walk);
    validate(cfg.bigclam);
    return 0;
  });
  Inputs in = load_inputs(cfg, false);
  PairOutcome pairs = build_pairs(cfg, in);

  TrainStats stats;
  auto embedding = run_stage("train", [&] {
    return train<double>(in.graph, pairs.pairs, cfg.train, &stats);
  });

  EmbedSummary summary;
  summary.nodes = static_cast<std::size_t>(in.graph.num_nodes());
  summary.edges = in.graph.num_edges();
  summary.triangles = count_triangles(pairs.triads);
  summary.communities = pairs.communities.affiliations.num_communities();
  summary.positive_pairs = stats.positive_pairs;
  summary.embedding_path = cfg.output_dir / "embedding.txt";
  summary.manifest_path = cfg.output_dir / "manifest.json";

  run_stage("write", [&] {
    auto out = open_output(summary.embedding_path);
    write_embedding_text(embedding, in.graph, out);
    check_written(out, summary.embedding_path);
    if (cfg.write_binary) {
      write_embedding_binary(embedding, in.graph, cfg.output_dir / "embedding.bin");
    }

    nlohmann::json m;
    m["config"] = describe(cfg);
    m["seeds"] = {{"global", cfg.seed},
                  {"bigclam", cfg.bigclam.seed},
                  {"walk", cfg.walk.seed},
                  {"train", cfg.train.seed},
                  {"eval", cfg.eval.seed}};
    m["inputs"] = {{"edges", input_record(cfg.edges)},
                   {"labels", input_record(cfg.labels)}};
    const auto& comm = pairs.communities;
    nlohmann::json community = {{"strategy", comm.strategy},
                                {"count", summary.communities},
                                {"dropped", comm.dropped}};
    if (comm.final_likelihood) {
      community["sweeps"] = comm.sweeps;
      community["converged"] = comm.converged;
      community["threshold"] = comm.threshold;
      community["log_likelihood"] = *comm.final_likelihood;
    }
    m["stats"] = {{"nodes", summary.nodes},
                  {"edges", summary.edges},
                  {"mean_degree", mean_degree(in.graph)},
                  {"triangles", summary.triangles},
                  {"communities", community},
                  {"support",
                   {{"t", pairs.triads.size()},
                    {"h", pairs.overlap.size()},
                    {"w", pairs.cooccurrence.size()},
                    {"merged", pairs.pairs.size()}}},
                  {"positive_pairs", summary.positive_pairs},
                  {"sgd_steps", stats.steps},
                  {"skipped_negatives", stats.skipped_negatives},
                  {"epoch_max_norm", stats.epoch_max_norm}};
    if (in.labels) {
      m["stats"]["label_classes"] = in.labels->num_classes();
      m["stats"]["labels_skipped"] = in.labels->skipped_nodes.size();
    }
    m["outputs"] = {{"embedding", summary.embedding_path.filename().string()},
                    {"embedding_fnv1a64", file_checksum(summary.embedding_path)}};
    auto mout = open_output(summary.manifest_path);
    mout << m.dump(2) << '\n';
    check_written(mout, summary.manifest_path);
    summary.manifest = std::move(m);
    return 0;
  });
  return summary;
}

std::filesystem::path cmd_communities(PipelineConfig cfg) {
  cfg.resolve();
  Inputs in = load_inputs(cfg, false);
  auto outcome = find_communities(cfg, in);
  auto path = cfg.output_dir / "affiliations.txt";
  run_stage("write", [&] {
    auto out = open_output(path);
    write_affiliations(outcome.affiliations, in.graph, out);
    check_written(out, path);
    return 0;
  });
  return path;
}

EvalReport cmd_eval(PipelineConfig cfg, const std::filesystem::path& embedding,
                    EvalTask task) {
  cfg.resolve();
  run_stage("config", [&] {
    validate(cfg.eval);
    return 0;
  });
  Inputs in = load_inputs(cfg, task == EvalTask::classify);
  auto u = run_stage("load", [&] {
    auto emb = embedding.extension() == ".bin" ? load_embedding_binary<double>(embedding)
                                               : load_embedding_text<double>(embedding);
    if (emb.vectors.cols() != cfg.train.dim) {
      throw DimensionMismatch("embedding has " + std::to_string(emb.vectors.cols()) +
                              " columns, config train.dim is " +
                              std::to_string(cfg.train.dim));
    }
    return align_to_graph(emb, in.graph);
  });

  EvalReport report;
  std::string name;
  if (task == EvalTask::classify) {
    name = "classify";
    report = run_stage("eval", [&] { return classify_and_score(u, *in.labels, cfg.eval); });
  } else {
    name = "reconstruct";
    report.reconstruction = run_stage(
        "eval", [&] { return reconstruct_and_score(u, in.graph, cfg.threads); });
  }

  run_stage("write", [&] {
    auto text_path = cfg.output_dir / ("report_" + name + ".txt");
    auto out = open_output(text_path);
    write_report_text(report, out);
    check_written(out, text_path);
    auto tsv_path = cfg.output_dir / ("records_" + name + ".tsv");
    auto tsv = open_output(tsv_path);
    write_report_records(report, tsv);
    check_written(tsv, tsv_path);
    return 0;
  });
  return report;
}

std::filesystem::path cmd_dump_pairs(PipelineConfig cfg) {
  cfg.resolve();
  Inputs in = load_inputs(cfg, false);
  PairOutcome pairs = build_pairs(cfg, in);
  auto path = cfg.output_dir / "pairs.txt";
  run_stage("write", [&] {
    auto out = open_output(path);
    write_pair_weights(pairs.pairs, out);
    check_written(out, path);
    return 0;
  });
  return path;
}

std::filesystem::path cmd_dump_walks(PipelineConfig cfg) {
  cfg.resolve();
  Inputs in = load_inputs(cfg, false);
  auto walks = run_stage("walks", [&] {
    validate(cfg.walk);
    return generate_walks(in.graph, cfg.walk);
  });
  auto path = cfg.output_dir / "walks.txt";
  run_stage("write", [&] {
    auto out = open_output(path);
    write_walks(walks, in.graph, out);
    check_written(out, path);
    return 0;
  });
  return path;
}

}  // namespace rum

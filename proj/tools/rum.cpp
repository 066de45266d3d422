#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rum/config.hpp"
#include "rum/error.hpp"
#include "rum/pipeline.hpp"

namespace {

int exit_code(rum::ErrorCategory category) {
  switch (category) {
    case rum::ErrorCategory::config: return 2;
    case rum::ErrorCategory::input: return 3;
    case rum::ErrorCategory::numerical: return 4;
    case rum::ErrorCategory::internal: break;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-level structure graph embedding"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");

  std::map<std::string, std::string> overrides;
  for (const auto& key : rum::config_keys()) {
    app.add_option_function<std::string>(
        "--" + key.name,
        [&overrides, name = key.name](const std::string& v) { overrides[name] = v; },
        key.help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  bool print_config = false;
  auto* embed = app.add_subcommand("embed", "train an embedding (embedding.txt, manifest.json)");
  embed->add_flag("--print-config", print_config, "print the resolved configuration first");
  auto* communities = app.add_subcommand("communities", "write affiliations.txt");
  auto* eval = app.add_subcommand("eval", "score an embedding");
  std::string embedding_path;
  std::string task = "classify";
  eval->add_option("--embedding", embedding_path, "embedding file (.txt or .bin)")->required();
  eval->add_option("--task", task, "classify | reconstruct")
      ->check(CLI::IsMember({"classify", "reconstruct"}));
  auto* dump_pairs = app.add_subcommand("dump-pairs", "write pairs.txt (i j t h w)");
  auto* dump_walks = app.add_subcommand("dump-walks", "write walks.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    rum::PipelineConfig cfg;
    if (!config_path.empty()) rum::apply_settings(cfg, rum::load_config_file(config_path));
    rum::apply_settings(cfg, overrides);

    if (*embed) {
      if (print_config) {
        for (const auto& [k, v] : rum::describe(cfg)) std::cout << k << " = " << v << '\n';
      }
      auto summary = rum::cmd_embed(cfg);
      std::cout << "nodes " << summary.nodes << "  edges " << summary.edges << "  triangles "
                << summary.triangles << "  communities " << summary.communities
                << "  positive pairs " << summary.positive_pairs << '\n'
                << "wrote " << summary.embedding_path.string() << '\n'
                << "wrote " << summary.manifest_path.string() << '\n';
    } else if (*communities) {
      std::cout << "wrote " << rum::cmd_communities(cfg).string() << '\n';
    } else if (*eval) {
      auto kind = task == "classify" ? rum::EvalTask::classify : rum::EvalTask::reconstruct;
      auto report = rum::cmd_eval(cfg, embedding_path, kind);
      rum::write_report_text(report, std::cout);
    } else if (*dump_pairs) {
      std::cout << "wrote " << rum::cmd_dump_pairs(cfg).string() << '\n';
    } else if (*dump_walks) {
      std::cout << "wrote " << rum::cmd_dump_walks(cfg).string() << '\n';
    }
  } catch (const rum::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

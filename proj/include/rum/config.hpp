#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rum/community.hpp"
#include "rum/eval.hpp"
#include "rum/structure.hpp"
#include "rum/trainer.hpp"
#include "rum/walker.hpp"

namespace rum {

struct PipelineConfig {
  std::filesystem::path edges;
  std::filesystem::path labels;  // optional
  std::filesystem::path output_dir = ".";
  bool write_binary = false;

  std::string community_strategy = "bigclam";
  std::uint64_t pair_budget = kDefaultPairBudget;

  BigClamConfig bigclam;
  WalkConfig walk;
  TrainConfig train;
  ClassifyConfig eval;

  std::uint64_t seed = 1;
  int threads = 1;

  /// Copies seed and thread settings into the stage configs. Stage seeds are
  /// derived from the global seed so stages draw independent streams.
  void resolve();
};

/// One settable configuration key ("walk.p", "train.dim", ...).
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

/// Every key the pipeline understands, in a stable order.
const std::vector<ConfigKey>& config_keys();

/// Parses "key = value" lines; '#' starts a comment line.
std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     std::string_view source = "<config>");
std::map<std::string, std::string> load_config_file(const std::filesystem::path& path);

/// Throws ConfigError for unknown keys or malformed values.
void apply_settings(PipelineConfig& cfg,
                    const std::map<std::string, std::string>& settings);

/// key -> current value for every registered key.
std::map<std::string, std::string> describe(const PipelineConfig& cfg);

}  // namespace rum

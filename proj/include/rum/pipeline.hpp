#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "rum/config.hpp"
#include "rum/error.hpp"
#include "rum/eval.hpp"

namespace rum {

/// A module failure annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.category(), "stage=" + stage + ": " + cause.what()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct EmbedSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::uint64_t triangles = 0;
  int communities = 0;
  std::size_t positive_pairs = 0;
  std::filesystem::path embedding_path;
  std::filesystem::path manifest_path;
  nlohmann::json manifest;
};

/// load -> triads -> communities -> walks -> merge -> train -> write.
/// Writes embedding.txt (and embedding.bin when enabled) and manifest.json
/// into cfg.output_dir.
EmbedSummary cmd_embed(PipelineConfig cfg);

/// Writes affiliations.txt into cfg.output_dir; returns its path.
std::filesystem::path cmd_communities(PipelineConfig cfg);

enum class EvalTask { classify, reconstruct };

/// Writes report_<task>.txt and records_<task>.tsv into cfg.output_dir.
EvalReport cmd_eval(PipelineConfig cfg, const std::filesystem::path& embedding,
                    EvalTask task);

/// Writes pairs.txt ("i j t h w") into cfg.output_dir; returns its path.
std::filesystem::path cmd_dump_pairs(PipelineConfig cfg);

/// Writes walks.txt into cfg.output_dir; returns its path.
std::filesystem::path cmd_dump_walks(PipelineConfig cfg);

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace rum

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rum/graph.hpp"
#include "rum/trainer.hpp"

namespace rum {

/// Text embedding file: header "n d", then "label v_1 ... v_d" per node.
/// Values use the shortest decimal form that round-trips exactly.
template <typename Scalar>
void write_embedding_text(const EmbeddingMatrix<Scalar>& u, const Graph& graph,
                          std::ostream& out);

template <typename Scalar>
struct LabeledEmbedding {
  std::vector<std::string> labels;
  EmbeddingMatrix<Scalar> vectors;
};

template <typename Scalar>
LabeledEmbedding<Scalar> read_embedding_text(std::istream& in,
                                             std::string_view source = "<stream>");
template <typename Scalar>
LabeledEmbedding<Scalar> load_embedding_text(const std::filesystem::path& path);

/// Reorders rows to the graph's node indices. Throws MissingNode for graph
/// nodes without a vector.
template <typename Scalar>
EmbeddingMatrix<Scalar> align_to_graph(const LabeledEmbedding<Scalar>& emb,
                                       const Graph& graph);

/// Raw little-endian row-major matrix at `path` plus a JSON sidecar at
/// `path` + ".json" with rows, cols, dtype and row labels.
template <typename Scalar>
void write_embedding_binary(const EmbeddingMatrix<Scalar>& u,
                            const Graph& graph,
                            const std::filesystem::path& path);
template <typename Scalar>
LabeledEmbedding<Scalar> load_embedding_binary(const std::filesystem::path& path);

}  // namespace rum

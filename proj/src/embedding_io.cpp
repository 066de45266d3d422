#include "rum/embedding_io.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "rum/error.hpp"
#include "text_util.hpp"

namespace rum {

namespace {

template <typename Scalar>
constexpr const char* dtype_name() {
  return sizeof(Scalar) == 4 ? "float32" : "float64";
}

static_assert(std::endian::native == std::endian::little,
              "binary embedding I/O assumes a little-endian host");

}  // namespace

template <typename Scalar>
void write_embedding_text(const EmbeddingMatrix<Scalar>& u, const Graph& graph,
                          std::ostream& out) {
  if (u.rows() != graph.num_nodes()) {
    throw DimensionMismatch("embedding has " + std::to_string(u.rows()) +
                            " rows, graph has " +
                            std::to_string(graph.num_nodes()) + " nodes");
  }
  std::string line;
  out << u.rows() << ' ' << u.cols() << '\n';
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    line = graph.label(static_cast<NodeId>(r));
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      line.push_back(' ');
      detail::append_number(line, u(r, c));
    }
    line.push_back('\n');
    out << line;
  }
}

template <typename Scalar>
LabeledEmbedding<Scalar> read_embedding_text(std::istream& in,
                                             std::string_view source) {
  const std::string where(source);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(where + ": empty embedding file");
  auto header = detail::split_ws(line);
  long long rows = -1, cols = -1;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), rows).ec != std::errc() ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), cols).ec != std::errc() ||
      rows < 0 || cols < 1) {
    throw ParseError(where + ":1: expected header 'n d'");
  }
  LabeledEmbedding<Scalar> emb;
  emb.vectors.resize(rows, cols);
  emb.labels.reserve(static_cast<std::size_t>(rows));
  for (long long r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError(where + ": expected " + std::to_string(rows) +
                       " rows, found " + std::to_string(r));
    }
    auto tokens = detail::split_ws(line);
    if (tokens.size() != static_cast<std::size_t>(cols) + 1) {
      throw DimensionMismatch(where + ":" + std::to_string(r + 2) + ": expected " +
                              std::to_string(cols) + " values, found " +
                              std::to_string(tokens.size() - (tokens.empty() ? 0 : 1)));
    }
    emb.labels.emplace_back(tokens[0]);
    for (long long c = 0; c < cols; ++c) {
      const auto tok = tokens[static_cast<std::size_t>(c) + 1];
      double value = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw ParseError(where + ":" + std::to_string(r + 2) + ": bad number '" +
                         std::string(tok) + "'");
      }
      emb.vectors(r, c) = static_cast<Scalar>(value);
    }
  }
  return emb;
}

template <typename Scalar>
LabeledEmbedding<Scalar> load_embedding_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path.string() + "'");
  return read_embedding_text<Scalar>(in, path.string());
}

template <typename Scalar>
EmbeddingMatrix<Scalar> align_to_graph(const LabeledEmbedding<Scalar>& emb,
                                       const Graph& graph) {
  EmbeddingMatrix<Scalar> out(graph.num_nodes(), emb.vectors.cols());
  std::vector<bool> seen(static_cast<std::size_t>(graph.num_nodes()), false);
  for (std::size_t r = 0; r < emb.labels.size(); ++r) {
    auto v = graph.find(emb.labels[r]);
    if (!v) continue;
    out.row(*v) = emb.vectors.row(static_cast<Eigen::Index>(r));
    seen[*v] = true;
  }
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (!seen[v]) {
      throw MissingNode("no embedding vector for node '" + graph.label(v) + "'");
    }
  }
  return out;
}

template <typename Scalar>
void write_embedding_binary(const EmbeddingMatrix<Scalar>& u,
                            const Graph& graph,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(u.data()),
            static_cast<std::streamsize>(u.size() * sizeof(Scalar)));
  nlohmann::json header = {{"rows", u.rows()},
                           {"cols", u.cols()},
                           {"dtype", dtype_name<Scalar>()},
                           {"order", "row-major"},
                           {"endianness", "little"},
                           {"labels", std::vector<std::string>(graph.labels().begin(),
                                                               graph.labels().end())}};
  std::ofstream side(path.string() + ".json");
  if (!side) throw IoError("cannot write '" + path.string() + ".json'");
  side << header.dump(1) << '\n';
}

template <typename Scalar>
LabeledEmbedding<Scalar> load_embedding_binary(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw IoError("cannot open '" + path.string() + ".json'");
  nlohmann::json header;
  try {
    side >> header;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ".json: " + e.what());
  }
  if (header.value("dtype", "") != dtype_name<Scalar>()) {
    throw DimensionMismatch(path.string() + ": dtype is " +
                            header.value("dtype", "?") + ", expected " +
                            dtype_name<Scalar>());
  }
  LabeledEmbedding<Scalar> emb;
  const auto rows = header.at("rows").get<Eigen::Index>();
  const auto cols = header.at("cols").get<Eigen::Index>();
  emb.labels = header.at("labels").get<std::vector<std::string>>();
  if (static_cast<Eigen::Index>(emb.labels.size()) != rows) {
    throw ParseError(path.string() + ".json: label count differs from rows");
  }
  emb.vectors.resize(rows, cols);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  in.read(reinterpret_cast<char*>(emb.vectors.data()),
          static_cast<std::streamsize>(emb.vectors.size() * sizeof(Scalar)));
  if (in.gcount() != static_cast<std::streamsize>(emb.vectors.size() * sizeof(Scalar))) {
    throw ParseError(path.string() + ": truncated matrix");
  }
  return emb;
}

#define RUM_EMBEDDING_IO_INSTANTIATE(Scalar)                                   \
  template void write_embedding_text(const EmbeddingMatrix<Scalar>&,           \
                                     const Graph&, std::ostream&);             \
  template LabeledEmbedding<Scalar> read_embedding_text(std::istream&,         \
                                                        std::string_view);     \
  template LabeledEmbedding<Scalar> load_embedding_text(                       \
      const std::filesystem::path&);                                           \
  template EmbeddingMatrix<Scalar> align_to_graph(                             \
      const LabeledEmbedding<Scalar>&, const Graph&);                          \
  template void write_embedding_binary(const EmbeddingMatrix<Scalar>&,         \
                                       const Graph&,                           \
                                       const std::filesystem::path&);          \
  template LabeledEmbedding<Scalar> load_embedding_binary(                     \
      const std::filesystem::path&);
RUM_EMBEDDING_IO_INSTANTIATE(float)
RUM_EMBEDDING_IO_INSTANTIATE(double)
#undef RUM_EMBEDDING_IO_INSTANTIATE

}  // namespace rum

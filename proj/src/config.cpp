#include "rum/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rum/error.hpp"
#include "text_util.hpp"

namespace rum {

void PipelineConfig::resolve() {
  bigclam.seed = derive_seed(seed, 1);
  walk.seed = derive_seed(seed, 2);
  train.seed = derive_seed(seed, 3);
  eval.seed = derive_seed(seed, 4);
  bigclam.threads = walk.threads = train.threads = eval.threads = threads;
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  text = detail::trim(text);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(std::string(key) + ": cannot parse '" + std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  text = detail::trim(text);
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(key) + ": expected a boolean, got '" + std::string(text) + "'");
}

template <typename T>
std::string format_number(T value) {
  std::string out;
  detail::append_number(out, value);
  return out;
}

template <typename T>
ConfigKey number_key(std::string name, std::string help, T PipelineConfig::*outer) {
  return {name, std::move(help),
          [name, outer](PipelineConfig& c, std::string_view v) {
            c.*outer = parse_number<T>(name, v);
          },
          [outer](const PipelineConfig& c) { return format_number(c.*outer); }};
}

// Member of a nested stage config, e.g. &PipelineConfig::walk, &WalkConfig::p.
template <typename Stage, typename T>
ConfigKey nested_key(std::string name, std::string help, Stage PipelineConfig::*stage,
                     T Stage::*field) {
  if constexpr (std::is_same_v<T, bool>) {
    return {name, std::move(help),
            [name, stage, field](PipelineConfig& c, std::string_view v) {
              (c.*stage).*field = parse_bool(name, v);
            },
            [stage, field](const PipelineConfig& c) {
              return std::string((c.*stage).*field ? "true" : "false");
            }};
  } else {
    return {name, std::move(help),
            [name, stage, field](PipelineConfig& c, std::string_view v) {
              (c.*stage).*field = parse_number<T>(name, v);
            },
            [stage, field](const PipelineConfig& c) {
              return format_number((c.*stage).*field);
            }};
  }
}

ConfigKey path_key(std::string name, std::string help,
                   std::filesystem::path PipelineConfig::*field) {
  return {std::move(name), std::move(help),
          [field](PipelineConfig& c, std::string_view v) {
            c.*field = std::string(detail::trim(v));
          },
          [field](const PipelineConfig& c) { return (c.*field).string(); }};
}

std::vector<ConfigKey> build_keys() {
  using P = PipelineConfig;
  std::vector<ConfigKey> keys;
  keys.push_back(path_key("input.edges", "edge-list file", &P::edges));
  keys.push_back(path_key("input.labels", "node label file (optional)", &P::labels));
  keys.push_back(path_key("output.dir", "directory for outputs", &P::output_dir));
  keys.push_back({"output.binary", "also write embedding.bin",
                  [](P& c, std::string_view v) { c.write_binary = parse_bool("output.binary", v); },
                  [](const P& c) { return std::string(c.write_binary ? "true" : "false"); }});
  keys.push_back({"community.strategy", "bigclam[:m=K] | import:PATH | cc",
                  [](P& c, std::string_view v) { c.community_strategy = detail::trim(v); },
                  [](const P& c) { return c.community_strategy; }});
  keys.push_back(number_key("structure.pair_budget",
                            "max node pairs a single community may expand to",
                            &P::pair_budget));

  keys.push_back(nested_key("bigclam.m", "community count (0: label count or ceil(sqrt n))",
                            &P::bigclam, &BigClamConfig::num_communities));
  keys.push_back(nested_key("bigclam.max_iters", "max sweeps", &P::bigclam,
                            &BigClamConfig::max_iters));
  keys.push_back(nested_key("bigclam.step_init", "initial ascent step", &P::bigclam,
                            &BigClamConfig::step_init));
  keys.push_back(nested_key("bigclam.step_backtrack", "backtracking factor in (0,1)",
                            &P::bigclam, &BigClamConfig::step_backtrack));
  keys.push_back(nested_key("bigclam.max_backtracks", "line-search attempts per row",
                            &P::bigclam, &BigClamConfig::max_backtracks));
  keys.push_back(nested_key("bigclam.armijo", "sufficient-increase constant", &P::bigclam,
                            &BigClamConfig::armijo));
  keys.push_back(nested_key("bigclam.tol", "relative likelihood gain to stop", &P::bigclam,
                            &BigClamConfig::tol));
  keys.push_back(nested_key("bigclam.threshold", "membership cutoff (0: sqrt(-log(1-1/n)))",
                            &P::bigclam, &BigClamConfig::threshold));
  keys.push_back(nested_key("bigclam.edge_floor", "floor on edge inner products", &P::bigclam,
                            &BigClamConfig::edge_floor));

  keys.push_back(nested_key("walk.walks_per_node", "walks started per node", &P::walk,
                            &WalkConfig::walks_per_node));
  keys.push_back(nested_key("walk.length", "nodes per walk", &P::walk, &WalkConfig::walk_length));
  keys.push_back(nested_key("walk.window", "co-occurrence window radius", &P::walk,
                            &WalkConfig::window));
  keys.push_back(nested_key("walk.p", "return parameter", &P::walk, &WalkConfig::p));
  keys.push_back(nested_key("walk.q", "in-out parameter", &P::walk, &WalkConfig::q));
  keys.push_back(nested_key("walk.binary", "clip co-occurrence counts to 1", &P::walk,
                            &WalkConfig::binary));

  keys.push_back(nested_key("train.dim", "embedding dimension", &P::train, &TrainConfig::dim));
  keys.push_back(nested_key("train.alpha", "triad weight", &P::train, &TrainConfig::alpha));
  keys.push_back(nested_key("train.beta", "shared-community weight", &P::train,
                            &TrainConfig::beta));
  keys.push_back(nested_key("train.epochs", "passes over the positive stream", &P::train,
                            &TrainConfig::epochs));
  keys.push_back(nested_key("train.negatives", "negatives per positive", &P::train,
                            &TrainConfig::negatives));
  keys.push_back(nested_key("train.lr_init", "initial learning rate", &P::train,
                            &TrainConfig::lr_init));
  keys.push_back(nested_key("train.lr_final", "final learning rate", &P::train,
                            &TrainConfig::lr_final));
  keys.push_back(nested_key("train.sigmoid_clip", "inner-product clamp", &P::train,
                            &TrainConfig::sigmoid_clip));
  keys.push_back(nested_key("train.max_weight", "cap on pair weight (0: none)", &P::train,
                            &TrainConfig::max_weight));
  keys.push_back({"train.mode", "weighted | sample",
                  [](P& c, std::string_view v) {
                    v = detail::trim(v);
                    if (v == "weighted") {
                      c.train.mode = SamplingMode::weighted_pass;
                    } else if (v == "sample") {
                      c.train.mode = SamplingMode::sample_by_weight;
                    } else {
                      throw ConfigError("train.mode: expected 'weighted' or 'sample'");
                    }
                  },
                  [](const P& c) {
                    return std::string(c.train.mode == SamplingMode::weighted_pass ? "weighted"
                                                                                   : "sample");
                  }});
  keys.push_back(nested_key("train.samples_per_epoch",
                            "draws per epoch in sample mode (0: support size)", &P::train,
                            &TrainConfig::samples_per_epoch));
  keys.push_back(nested_key("train.divergence_norm", "row norm treated as divergence",
                            &P::train, &TrainConfig::divergence_norm));

  keys.push_back({"eval.ratios", "comma-separated training ratios",
                  [](P& c, std::string_view v) {
                    std::vector<double> ratios;
                    std::string text(v);
                    std::stringstream ss(text);
                    std::string item;
                    while (std::getline(ss, item, ',')) {
                      if (!detail::trim(item).empty()) {
                        ratios.push_back(parse_number<double>("eval.ratios", item));
                      }
                    }
                    c.eval.ratios = std::move(ratios);
                  },
                  [](const P& c) {
                    std::string out;
                    for (std::size_t k = 0; k < c.eval.ratios.size(); ++k) {
                      if (k) out += ',';
                      detail::append_number(out, c.eval.ratios[k]);
                    }
                    return out;
                  }});
  keys.push_back(nested_key("eval.repetitions", "splits per ratio", &P::eval,
                            &ClassifyConfig::repetitions));
  keys.push_back({"eval.c", "inverse L2 strength",
                  [](P& c, std::string_view v) { c.eval.logreg.c = parse_number<double>("eval.c", v); },
                  [](const P& c) { return format_number(c.eval.logreg.c); }});
  keys.push_back({"eval.max_iters", "logistic regression iterations",
                  [](P& c, std::string_view v) {
                    c.eval.logreg.max_iters = parse_number<int>("eval.max_iters", v);
                  },
                  [](const P& c) { return format_number(c.eval.logreg.max_iters); }});
  keys.push_back({"eval.tol", "gradient-norm tolerance",
                  [](P& c, std::string_view v) { c.eval.logreg.tol = parse_number<double>("eval.tol", v); },
                  [](const P& c) { return format_number(c.eval.logreg.tol); }});

  keys.push_back(number_key("seed", "global seed", &P::seed));
  keys.push_back(number_key("threads", "worker threads (1: deterministic)", &P::threads));
  return keys;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

std::map<std::string, std::string> parse_config_text(std::string_view text,
                                                     std::string_view source) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    auto key = detail::trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    }
    out[std::string(key)] = std::string(detail::trim(line.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.string());
}

void apply_settings(PipelineConfig& cfg,
                    const std::map<std::string, std::string>& settings) {
  const auto& keys = config_keys();
  for (const auto& [name, value] : settings) {
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const ConfigKey& k) { return k.name == name; });
    if (it == keys.end()) throw ConfigError("unknown config key '" + name + "'");
    it->set(cfg, value);
  }
}

std::map<std::string, std::string> describe(const PipelineConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& key : config_keys()) out[key.name] = key.get(cfg);
  return out;
}

}  // namespace rum

#include "rum/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rum/error.hpp"

namespace rum {

void validate(const TrainConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("train.dim must be >= 1");
  if (cfg.alpha < 0 || cfg.beta < 0) {
    throw ConfigError("train.alpha and train.beta must be >= 0");
  }
  if (cfg.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (cfg.negatives < 1) throw ConfigError("train.negatives must be >= 1");
  if (!(cfg.lr_final > 0) || cfg.lr_init < cfg.lr_final) {
    throw ConfigError("need train.lr_init >= train.lr_final > 0");
  }
  if (!(cfg.sigmoid_clip > 0)) throw ConfigError("train.sigmoid_clip must be > 0");
  if (cfg.max_weight < 0) throw ConfigError("train.max_weight must be >= 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

NoiseSampler::NoiseSampler(const Graph& graph, double power) {
  mass_.assign(static_cast<std::size_t>(graph.num_nodes()), 0.0);
  double total = 0;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) == 0) continue;
    mass_[v] = std::pow(static_cast<double>(graph.degree(v)), power);
    total += mass_[v];
    nodes_.push_back(v);
  }
  if (nodes_.empty()) throw EmptyGraph("noise sampler needs an edge");
  double running = 0;
  for (NodeId v : nodes_) {
    mass_[v] /= total;
    running += mass_[v];
    cumulative_.push_back(running);
  }
  cumulative_.back() = 1.0;
}

NodeId NoiseSampler::sample(Rng& rng) const {
  const double r = uniform01(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  if (it == cumulative_.end()) --it;
  return nodes_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double NoiseSampler::probability(NodeId v) const { return mass_[v]; }

PositiveSampleStream::PositiveSampleStream(const PairWeightTable& pairs,
                                           const TrainConfig& cfg)
    : mode_(cfg.mode), seed_(derive_seed(cfg.seed, 0x9051)) {
  for (const auto& p : pairs.entries()) {
    double weight = cfg.alpha * static_cast<double>(p.t) +
                    cfg.beta * static_cast<double>(p.h) +
                    static_cast<double>(p.w);
    if (!(weight > 0)) continue;
    if (cfg.max_weight > 0) weight = std::min(weight, cfg.max_weight);
    support_.push_back({p.i, p.j, weight});
    total_weight_ += weight;
    cumulative_.push_back(total_weight_);
  }
  if (support_.empty()) {
    throw EmptyTrainingSet("no node pair has a positive combined weight");
  }
  per_epoch_ = support_.size();
  if (mode_ == SamplingMode::sample_by_weight && cfg.samples_per_epoch > 0) {
    per_epoch_ = cfg.samples_per_epoch;
  }
}

std::vector<PositiveSample> PositiveSampleStream::epoch(int index) const {
  Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(index)));
  std::vector<PositiveSample> out;
  out.reserve(per_epoch_);
  if (mode_ == SamplingMode::weighted_pass) {
    out.assign(support_.begin(), support_.end());
    shuffle(std::span(out), rng);
  } else {
    for (std::size_t k = 0; k < per_epoch_; ++k) {
      const double r = uniform01(rng) * total_weight_;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
      if (it == cumulative_.end()) --it;
      const auto& s = support_[static_cast<std::size_t>(it - cumulative_.begin())];
      out.push_back({s.i, s.j, 1.0});
    }
  }
  for (auto& s : out) {
    if (rng() & 1) std::swap(s.i, s.j);
  }
  return out;
}

namespace {

double clamped(double x, double clip) { return std::clamp(x, -clip, clip); }

// log sigma(x) without overflow.
double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

template <typename Scalar>
struct StepWorkspace {
  using Row = Eigen::Matrix<double, 1, Eigen::Dynamic>;
  Row ui, uj, di, dj;
  std::vector<Row> dk;

  void prepare(Eigen::Index dim, std::size_t negatives) {
    if (ui.size() != dim) {
      ui.resize(dim);
      uj.resize(dim);
      di.resize(dim);
      dj.resize(dim);
    }
    if (dk.size() < negatives) dk.resize(negatives, Row(dim));
    for (auto& d : dk) {
      if (d.size() != dim) d.resize(dim);
    }
  }
};

template <typename Scalar>
void sgd_step_impl(EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j,
                   double weight, std::span<const NodeId> negatives, double lr,
                   double clip, StepWorkspace<Scalar>& ws) {
  ws.prepare(u.cols(), negatives.size());
  ws.ui = u.row(i).template cast<double>();
  ws.uj = u.row(j).template cast<double>();
  const double g = weight * sigmoid(-clamped(ws.ui.dot(ws.uj), clip));
  ws.di = g * ws.uj;
  ws.dj = g * ws.ui;
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto uk = u.row(negatives[k]).template cast<double>();
    const double s = sigmoid(clamped(ws.ui.dot(uk), clip));
    ws.di.noalias() -= s * uk;
    ws.dk[k] = -s * ws.ui;
  }
  u.row(i) += (lr * ws.di).template cast<Scalar>();
  u.row(j) += (lr * ws.dj).template cast<Scalar>();
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    u.row(negatives[k]) += (lr * ws.dk[k]).template cast<Scalar>();
  }
}

double max_row_norm(const auto& u) {
  return u.rows() == 0 ? 0.0 : static_cast<double>(u.rowwise().norm().maxCoeff());
}

}  // namespace

template <typename Scalar>
double sampled_objective(const EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j,
                         double weight, std::span<const NodeId> negatives,
                         double clip) {
  const auto ui = u.row(i).template cast<double>();
  double value =
      -weight * log_sigmoid(clamped(ui.dot(u.row(j).template cast<double>()), clip));
  for (NodeId k : negatives) {
    value -= log_sigmoid(-clamped(ui.dot(u.row(k).template cast<double>()), clip));
  }
  return value;
}

template <typename Scalar>
void sgd_step(EmbeddingMatrix<Scalar>& u, NodeId i, NodeId j, double weight,
              std::span<const NodeId> negatives, double lr, double clip) {
  StepWorkspace<Scalar> ws;
  sgd_step_impl(u, i, j, weight, negatives, lr, clip, ws);
}

template <typename Scalar>
EmbeddingMatrix<Scalar> initial_embedding(NodeId num_nodes,
                                          const TrainConfig& cfg) {
  EmbeddingMatrix<Scalar> u(num_nodes, cfg.dim);
  Rng rng(derive_seed(cfg.seed, 0x1417));
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      u(r, c) = static_cast<Scalar>((uniform01(rng) - 0.5) / cfg.dim);
    }
  }
  return u;
}

template <typename Scalar>
EmbeddingMatrix<Scalar> train(const Graph& graph, const PairWeightTable& pairs,
                              const TrainConfig& cfg, TrainStats* stats) {
  validate(cfg);
  const PositiveSampleStream stream(pairs, cfg);
  const NoiseSampler noise(graph);
  EmbeddingMatrix<Scalar> u = initial_embedding<Scalar>(graph.num_nodes(), cfg);

  TrainStats local;
  local.positive_pairs = stream.support().size();
  const double total_steps =
      static_cast<double>(cfg.epochs) * static_cast<double>(stream.samples_per_epoch());
  const double lr_span = cfg.lr_init - cfg.lr_final;
  const auto k_neg = static_cast<std::size_t>(cfg.negatives);

  // Processes samples [lo, hi) of one epoch; `base` is the global index of
  // the epoch's first sample for the learning-rate schedule.
  auto run_shard = [&](std::span<const PositiveSample> samples, std::size_t lo,
                       std::size_t hi, double base, Rng& rng,
                       std::uint64_t& skipped) {
    StepWorkspace<Scalar> ws;
    std::vector<NodeId> negatives;
    negatives.reserve(k_neg);
    for (std::size_t s = lo; s < hi; ++s) {
      const auto& sample = samples[s];
      negatives.clear();
      for (std::size_t k = 0; k < k_neg; ++k) {
        NodeId neg = noise.sample(rng);
        int retries = 0;
        while ((neg == sample.i || neg == sample.j) && retries < 10) {
          neg = noise.sample(rng);
          ++retries;
        }
        if (neg == sample.i || neg == sample.j) {
          ++skipped;
          continue;
        }
        negatives.push_back(neg);
      }
      const double progress =
          total_steps > 1 ? (base + static_cast<double>(s)) / (total_steps - 1) : 0.0;
      const double lr = cfg.lr_init - lr_span * std::min(progress, 1.0);
      sgd_step_impl(u, sample.i, sample.j, sample.weight, negatives, lr,
                    cfg.sigmoid_clip, ws);
    }
  };

  Rng rng(derive_seed(cfg.seed, 0x4e67));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto samples = stream.epoch(epoch);
    const double base = static_cast<double>(epoch) *
                        static_cast<double>(stream.samples_per_epoch());
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads),
                                                samples.size());
    if (threads <= 1) {
      run_shard(samples, 0, samples.size(), base, rng, local.skipped_negatives);
    } else {
      // Lock-free shards: concurrent row updates race benignly, so results
      // are reproducible in distribution only.
      std::vector<std::thread> workers;
      std::vector<std::uint64_t> skipped(threads, 0);
      for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
          Rng shard_rng(derive_seed(cfg.seed, 0x4e67 + t + 1,
                                    static_cast<std::uint64_t>(epoch)));
          run_shard(samples, samples.size() * t / threads,
                    samples.size() * (t + 1) / threads, base, shard_rng,
                    skipped[t]);
        });
      }
      for (auto& w : workers) w.join();
      for (auto s : skipped) local.skipped_negatives += s;
    }
    local.steps += samples.size();

    const double norm = max_row_norm(u);
    local.epoch_max_norm.push_back(norm);
    if (!std::isfinite(norm) || !u.allFinite() || norm > cfg.divergence_norm) {
      throw DivergenceDetected("embedding row norm reached " +
                               std::to_string(norm) + " in epoch " +
                               std::to_string(epoch) +
                               " (learning rate too high?)");
    }
  }
  if (stats) *stats = std::move(local);
  return u;
}

#define RUM_TRAINER_INSTANTIATE(Scalar)                                       \
  template double sampled_objective(const EmbeddingMatrix<Scalar>&, NodeId,   \
                                    NodeId, double, std::span<const NodeId>,  \
                                    double);                                  \
  template void sgd_step(EmbeddingMatrix<Scalar>&, NodeId, NodeId, double,    \
                         std::span<const NodeId>, double, double);            \
  template EmbeddingMatrix<Scalar> initial_embedding(NodeId,                  \
                                                     const TrainConfig&);     \
  template EmbeddingMatrix<Scalar> train(const Graph&, const PairWeightTable&, \
                                         const TrainConfig&, TrainStats*);
RUM_TRAINER_INSTANTIATE(float)
RUM_TRAINER_INSTANTIATE(double)
#undef RUM_TRAINER_INSTANTIATE

}  // namespace rum

#include "dflsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

std::string_view to_string(Paradigm p) { return p == Paradigm::cfl ? "cfl" : "dfl"; }

std::string_view to_string(TopologyKind t) {
  switch (t) {
    case TopologyKind::fully_connected: return "fully_connected";
    case TopologyKind::ring: return "ring";
    case TopologyKind::star: return "star";
    case TopologyKind::watts_strogatz: return "watts_strogatz";
  }
  return "fully_connected";
}

std::string_view to_string(DatasetKind d) {
  switch (d) {
    case DatasetKind::mnist: return "mnist";
    case DatasetKind::fashion_mnist: return "fashion_mnist";
    case DatasetKind::synthetic: return "synthetic";
  }
  return "synthetic";
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

bool same_outcome(const RoundRecord& a, const RoundRecord& b) {
  return a.round == b.round && a.clean == b.clean && a.triggered == b.triggered && a.metrics == b.metrics &&
         a.topology_hash == b.topology_hash && a.bytes_exchanged == b.bytes_exchanged &&
         a.sim_transfer_seconds == b.sim_transfer_seconds;
}

std::set<NodeId> select_malicious(int n, int pnr_percent, std::optional<NodeId> excluded_hub, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("select_malicious: n must be >= 1");
  if (pnr_percent < 0 || pnr_percent > 90 || pnr_percent % 10 != 0) {
    throw InvalidArgument("select_malicious: pnr must be one of 0, 10, ..., 90");
  }
  const auto count = static_cast<std::size_t>(std::llround(n * pnr_percent / 100.0));
  std::vector<NodeId> eligible;
  for (NodeId v = 0; v < n; ++v) {
    if (!excluded_hub || v != *excluded_hub) eligible.push_back(v);
  }
  if (count > eligible.size()) throw InvalidArgument("select_malicious: not enough eligible nodes");
  Engine rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  return {eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(count)};
}

namespace {

std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, std::shared_ptr<const LabeledDataset>>& idx_cache() {
  static std::map<std::string, std::shared_ptr<const LabeledDataset>> cache;
  return cache;
}

std::shared_ptr<const LabeledDataset> cached_idx(const std::filesystem::path& images,
                                                 const std::filesystem::path& labels) {
  const std::string key = std::filesystem::absolute(images).lexically_normal().string() + "|" +
                          std::filesystem::absolute(labels).lexically_normal().string();
  std::lock_guard lock(cache_mutex());
  auto& cache = idx_cache();
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto ds = std::make_shared<const LabeledDataset>(load_idx(images, labels));
  cache.emplace(key, ds);
  return ds;
}

TopologyGraph build_topology(const ScenarioConfig& cfg) {
  if (cfg.paradigm == Paradigm::cfl) return star(cfg.n_clients + 1, cfg.n_clients);
  const int n = cfg.n_clients;
  switch (cfg.topology.kind) {
    // A lone node has nothing to connect to and simply trains locally.
    case TopologyKind::fully_connected: return n == 1 ? TopologyGraph(1) : fully_connected(n);
    case TopologyKind::ring: return ring(n);
    case TopologyKind::star: return star(n, cfg.topology.hub);
    case TopologyKind::watts_strogatz:
      return watts_strogatz(n, cfg.topology.k, cfg.topology.p, derive_seed(cfg.master_seed, Purpose::topology));
  }
  throw InvalidArgument("unhandled topology");
}

MlpArchitecture resolve_architecture(const ScenarioConfig& cfg, const LabeledDataset& train) {
  MlpArchitecture arch{cfg.architecture};
  if (arch.layer_sizes.empty()) arch.layer_sizes = {train.dim(), 256, 128, train.label_count};
  arch.validate();
  if (arch.input_dim() != train.dim()) throw ShapeMismatch("architecture input size differs from feature dimension");
  if (arch.output_dim() != train.label_count) throw ShapeMismatch("architecture output size differs from label count");
  return arch;
}

LabeledDataset poison_dataset(const LabeledDataset& ds, const AttackSpec& attack, std::uint64_t seed) {
  switch (attack.kind) {
    case AttackKind::untargeted_label_flip: return flip_labels_untargeted(ds, seed);
    case AttackKind::untargeted_sample_poison: return poison_samples_gaussian(ds, attack.noise_ratio, seed);
    case AttackKind::targeted_label_flip: return flip_labels_targeted(ds, attack.source_label, attack.target_label);
    case AttackKind::backdoor: return implant_backdoor(ds, attack.trigger, attack.target_label);
    default: return ds;
  }
}

}  // namespace

ScenarioData load_scenario_data(const ScenarioConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.kind == DatasetKind::synthetic) {
    const auto& s = d.synthetic;
    auto train = synthetic_blobs(s.classes, s.per_class, s.dim, s.spread, s.seed);
    auto test = synthetic_blobs(s.classes, s.test_per_class, s.dim, s.spread, mix64(s.seed));
    train.image_shape = s.image_shape;
    test.image_shape = s.image_shape;
    return {std::make_shared<const LabeledDataset>(std::move(train)),
            std::make_shared<const LabeledDataset>(std::move(test))};
  }
  return {cached_idx(d.train_images, d.train_labels), cached_idx(d.test_images, d.test_labels)};
}

Federation::Federation(const ScenarioConfig& cfg, const ScenarioData& data, RunOptions options)
    : cfg_(cfg), options_(std::move(options)) {
  if (!data.train || !data.test) throw InvalidArgument("scenario data is missing");
  if (cfg_.n_clients < 1) throw InvalidArgument("n_clients must be >= 1");
  if (cfg_.rounds < 0) throw InvalidArgument("rounds must be >= 0");
  if (cfg_.paradigm == Paradigm::cfl &&
      (cfg_.aggregator.kind == AggregatorKind::sentinel || cfg_.voyager_active())) {
    throw InvalidArgument("sentinel and voyager are decentralized defences and need paradigm dfl");
  }

  topology_ = build_topology(cfg_);
  test_ = data.test;
  if (cfg_.attack.kind == AttackKind::backdoor) {
    triggered_test_ = std::make_shared<const LabeledDataset>(apply_trigger_all(*test_, cfg_.attack.trigger));
  }

  LabeledDataset train = take_prefix(*data.train, cfg_.dataset.subsample);
  const MlpArchitecture arch = resolve_architecture(cfg_, train);
  if (cfg_.paradigm == Paradigm::cfl && cfg_.aggregator.kind == AggregatorKind::fltrust) {
    const double frac = static_cast<double>(cfg_.fltrust_root_size) / static_cast<double>(train.size());
    auto [rest, root] = holdout_split(train, frac, derive_seed(cfg_.master_seed, Purpose::root_split));
    train = std::move(rest);
    root_data_ = std::make_shared<const LabeledDataset>(std::move(root));
  }

  std::optional<NodeId> hub;
  if (cfg_.paradigm == Paradigm::dfl && cfg_.topology.kind == TopologyKind::star) hub = cfg_.topology.hub;
  malicious_ = select_malicious(cfg_.n_clients, cfg_.pnr_percent, hub,
                                derive_seed(cfg_.master_seed, Purpose::malicious_selection));
  for (NodeId v = 0; v < cfg_.n_clients; ++v) {
    if (!malicious_.contains(v)) benign_.insert(v);
  }

  auto shards = partition_iid(train, cfg_.n_clients, derive_seed(cfg_.master_seed, Purpose::partition));
  const ModelParams init = init_model(arch, derive_seed(cfg_.master_seed, Purpose::model_init));

  train_template_.epochs = cfg_.epochs_per_round;
  train_template_.learning_rate = cfg_.learning_rate;
  train_template_.batch_size = cfg_.batch_size;

  for (NodeId v = 0; v < cfg_.n_clients; ++v) {
    NodeState s;
    s.id = v;
    s.role = malicious_.contains(v) ? NodeRole::malicious : NodeRole::benign;
    s.model = init;
    s.previous_model = init;
    s.aggregator = cfg_.aggregator;
    LabeledDataset local = std::move(shards[static_cast<std::size_t>(v)]);
    if (cfg_.holdout_fraction > 0.0) {
      auto [tr, val] = holdout_split(local, cfg_.holdout_fraction,
                                     derive_seed(cfg_.master_seed, Purpose::holdout, static_cast<std::uint64_t>(v)));
      local = std::move(tr);
      s.validation_data = std::make_shared<const LabeledDataset>(std::move(val));
    }
    if (s.role == NodeRole::malicious) {
      s.attack = cfg_.attack;
      if (is_data_attack(s.attack.kind)) {
        local = poison_dataset(local, s.attack,
                               derive_seed(cfg_.master_seed, Purpose::data_poison, static_cast<std::uint64_t>(v)));
      }
    }
    s.train_data = std::make_shared<const LabeledDataset>(std::move(local));
    nodes_.push_back(std::move(s));
  }
  if (cfg_.paradigm == Paradigm::cfl) {
    NodeState s;
    s.id = cfg_.n_clients;
    s.role = NodeRole::server;
    s.model = init;
    s.previous_model = init;
    s.aggregator = cfg_.aggregator;
    server_ = s.id;
    nodes_.push_back(std::move(s));
  }
}

std::vector<NodeId> Federation::trainers() const {
  std::vector<NodeId> out;
  for (const auto& s : nodes_) {
    if (s.role != NodeRole::server) out.push_back(s.id);
  }
  return out;
}

void Federation::train_phase(std::vector<ModelParams>& shared, std::vector<ModelParams>& previous) {
  const auto ids = trainers();
  const int r = round_ + 1;
  parallel_for(ids.size(), options_.threads, [&](std::size_t k) {
    const NodeState& s = nodes_[static_cast<std::size_t>(ids[k])];
    const auto node = static_cast<std::uint64_t>(s.id);
    TrainConfig tc = train_template_;
    tc.seed = derive_seed(cfg_.master_seed, Purpose::train_shuffle, node, static_cast<std::uint64_t>(r));
    ModelParams trained;
    try {
      trained = train(s.model, *s.train_data, tc);
    } catch (const TrainingDiverged& e) {
      throw TrainingDiverged("node " + std::to_string(s.id) + ", round " + std::to_string(r) + ": " + e.what());
    }
    if (s.role == NodeRole::malicious && is_model_attack(s.attack.kind)) {
      trained = poison_model_gaussian(
          trained, s.attack.noise_ratio,
          derive_seed(cfg_.master_seed, Purpose::model_poison, s.attack.colluding ? 0 : node,
                      static_cast<std::uint64_t>(r)),
          s.attack.model_noise);
    }
    previous[static_cast<std::size_t>(s.id)] = s.model;
    shared[static_cast<std::size_t>(s.id)] = std::move(trained);
  });
}

void Federation::aggregate_dfl(const std::vector<ModelParams>& shared, const std::vector<ModelParams>& previous,
                               std::vector<ModelParams>& next, std::map<NodeId, std::set<NodeId>>& flagged) {
  const int n = static_cast<int>(nodes_.size());
  std::vector<std::vector<ReceivedModel>> inbox(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : topology_.neighbors(v)) inbox[static_cast<std::size_t>(v)].emplace_back(u, &shared[u]);
  }

  if (cfg_.voyager_active()) {
    for (NodeId v : benign_) {
      auto& received = inbox[static_cast<std::size_t>(v)];
      const ModelParams& mine = shared[static_cast<std::size_t>(v)];
      for (const auto& [u, model] : received) {
        reputation_.observe(v, u, cosine_similarity(mine.values(), model->values()));
      }
      auto flags = detect_anomalies(mine, received, cfg_.voyager.tau);
      if (flags.empty()) continue;
      std::erase_if(received, [&](const ReceivedModel& m) { return flags.contains(m.first); });
      flagged.emplace(v, std::move(flags));
    }
  }

  parallel_for(static_cast<std::size_t>(n), options_.threads, [&](std::size_t k) {
    const NodeState& s = nodes_[k];
    AggregationInput in;
    in.own_id = s.id;
    in.own_model = &shared[k];
    in.own_previous = &previous[k];
    in.neighbors = inbox[k];
    in.local_validation = s.validation_data.get();
    next[k] = aggregate(s.aggregator, in);
  });
}

void Federation::aggregate_cfl(const std::vector<ModelParams>& shared, std::vector<ModelParams>& next) {
  const NodeState& srv = nodes_[static_cast<std::size_t>(*server_)];
  std::vector<ReceivedModel> clients;
  for (NodeId v = 0; v < cfg_.n_clients; ++v) clients.emplace_back(v, &shared[static_cast<std::size_t>(v)]);

  ModelParams global;
  if (cfg_.aggregator.kind == AggregatorKind::fltrust) {
    TrainConfig tc = train_template_;
    tc.seed = derive_seed(cfg_.master_seed, Purpose::train_shuffle, static_cast<std::uint64_t>(srv.id),
                          static_cast<std::uint64_t>(round_ + 1));
    const ModelParams reference = train(srv.model, *root_data_, tc);
    AggregationInput in;
    in.own_id = srv.id;
    in.own_model = &reference;
    in.own_previous = &srv.model;
    in.neighbors = clients;
    global = aggregate(srv.aggregator, in);
  } else {
    AggregationInput in;
    in.own_id = clients.front().first;
    in.own_model = clients.front().second;
    in.own_previous = &nodes_[0].model;
    in.neighbors.assign(clients.begin() + 1, clients.end());
    global = aggregate(srv.aggregator, in);
  }
  for (auto& m : next) m = global;
}

void Federation::apply_rewiring(const std::map<NodeId, std::set<NodeId>>& flagged) {
  const auto r = static_cast<std::uint64_t>(round_ + 1);
  for (const auto& [v, flags] : flagged) {
    std::set<NodeId> drop;
    for (NodeId u : flags) {
      if (topology_.has_edge(v, u)) drop.insert(u);
    }
    if (drop.empty()) continue;
    auto add = explore_candidates(topology_, v, reputation_, static_cast<int>(drop.size()),
                                  derive_seed(cfg_.master_seed, Purpose::explorer, static_cast<std::uint64_t>(v), r));
    topology_ = deploy_connections(topology_, v, drop, add);
  }
}

void Federation::evaluate_round(RoundRecord& rec) const {
  std::vector<NodeId> evaluated = trainers();
  // Nodes holding bit-identical models share one evaluation.
  std::vector<std::size_t> rep(evaluated.size());
  std::vector<std::size_t> unique;
  for (std::size_t k = 0; k < evaluated.size(); ++k) {
    rep[k] = k;
    for (std::size_t u : unique) {
      if (nodes_[static_cast<std::size_t>(evaluated[u])].model == nodes_[static_cast<std::size_t>(evaluated[k])].model) {
        rep[k] = u;
        break;
      }
    }
    if (rep[k] == k) unique.push_back(k);
  }

  const bool backdoor = triggered_test_ != nullptr;
  std::vector<ConfusionMatrix> clean(evaluated.size());
  std::vector<std::optional<ConfusionMatrix>> trig(evaluated.size());
  parallel_for(unique.size(), options_.threads, [&](std::size_t j) {
    const std::size_t k = unique[j];
    const ModelParams& m = nodes_[static_cast<std::size_t>(evaluated[k])].model;
    clean[k] = evaluate(m, *test_);
    if (backdoor) trig[k] = evaluate(m, *triggered_test_);
  });

  rec.clean.assign(nodes_.size(), std::nullopt);
  std::map<NodeId, double> f1, asr_t, asr_b;
  for (std::size_t k = 0; k < evaluated.size(); ++k) {
    const NodeId id = evaluated[k];
    const ConfusionMatrix& cm = clean[rep[k]];
    rec.clean[static_cast<std::size_t>(id)] = cm;
    if (!benign_.contains(id)) continue;
    f1[id] = macro_f1(cm);
    if (cfg_.attack.kind == AttackKind::targeted_label_flip) {
      asr_t[id] = asr_targeted(cm, cfg_.attack.source_label, cfg_.attack.target_label);
    }
    if (backdoor) {
      rec.triggered.emplace(id, *trig[rep[k]]);
      asr_b[id] = asr_backdoor(*trig[rep[k]], cfg_.attack.target_label);
    }
  }
  rec.metrics[MetricName::f1_benign_avg] = benign_average(f1, benign_);
  if (!asr_t.empty()) rec.metrics[MetricName::asr_targeted] = benign_average(asr_t, benign_);
  if (!asr_b.empty()) rec.metrics[MetricName::asr_backdoor] = benign_average(asr_b, benign_);
}

RoundRecord Federation::run_round() {
  const auto started = std::chrono::steady_clock::now();
  for (const auto& s : nodes_) {
    if (s.completed_round != round_) throw Error("round barrier violated by node " + std::to_string(s.id));
  }
  const std::size_t n = nodes_.size();
  RoundRecord rec;
  rec.round = round_ + 1;
  rec.topology_hash = topology_.hash();

  std::vector<ModelParams> shared(n), previous(n), next(n);
  if (server_) {
    shared[static_cast<std::size_t>(*server_)] = nodes_[static_cast<std::size_t>(*server_)].model;
    previous[static_cast<std::size_t>(*server_)] = nodes_[static_cast<std::size_t>(*server_)].model;
  }
  train_phase(shared, previous);

  std::uint64_t messages = 0;
  std::map<NodeId, std::set<NodeId>> flagged;
  if (cfg_.paradigm == Paradigm::dfl) {
    messages = 2 * static_cast<std::uint64_t>(topology_.edge_count());
    aggregate_dfl(shared, previous, next, flagged);
  } else {
    messages = 2 * static_cast<std::uint64_t>(cfg_.n_clients);
    aggregate_cfl(shared, next);
  }

  for (std::size_t k = 0; k < n; ++k) {
    nodes_[k].previous_model = std::move(previous[k]);
    nodes_[k].model = std::move(next[k]);
    nodes_[k].completed_round = round_ + 1;
  }
  apply_rewiring(flagged);
  ++round_;

  evaluate_round(rec);
  rec.bytes_exchanged = messages * parameter_count(nodes_.front().model.arch()) * sizeof(double);
  rec.sim_transfer_seconds = static_cast<double>(rec.bytes_exchanged) * 8.0 / (cfg_.bandwidth_mbps * 1e6);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (options_.on_round) options_.on_round(rec);
  return rec;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  return run_scenario(cfg, load_scenario_data(cfg), options);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const ScenarioData& data, const RunOptions& options) {
  Federation fed(cfg, data, options);
  ScenarioResult result;
  for (int r = 0; r < cfg.rounds; ++r) result.records.push_back(fed.run_round());
  result.benign = fed.benign();
  result.malicious = fed.malicious();
  for (const auto& s : fed.nodes()) result.final_models.push_back(s.model);
  result.final_topology = fed.topology();
  return result;
}

}  // namespace dflsim

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "dflsim/confusion_matrix.hpp"
#include "dflsim/learner.hpp"
#include "dflsim/metrics.hpp"
#include "dflsim/scenario.hpp"
#include "dflsim/topology.hpp"
#include "dflsim/voyager.hpp"

namespace dflsim {

enum class NodeRole { benign, malicious, server };

struct NodeState {
  NodeId id = 0;
  NodeRole role = NodeRole::benign;
  ModelParams model;
  ModelParams previous_model;
  std::shared_ptr<const LabeledDataset> train_data;       // null for the server
  std::shared_ptr<const LabeledDataset> validation_data;  // null for the server
  AttackSpec attack;
  AggregatorSpec aggregator;
  int completed_round = 0;
};

struct RoundRecord {
  int round = 0;
  /// Indexed by node id; empty for the CFL server.
  std::vector<std::optional<ConfusionMatrix>> clean;
  /// Benign nodes only, backdoor scenarios only.
  std::map<NodeId, ConfusionMatrix> triggered;
  std::map<MetricName, double> metrics;
  std::uint64_t topology_hash = 0;
  std::uint64_t bytes_exchanged = 0;
  double sim_transfer_seconds = 0.0;
  double wall_seconds = 0.0;
};

/// Equality of everything except wall time.
bool same_outcome(const RoundRecord& a, const RoundRecord& b);

/// Placement: when `excluded_hub` is set that node is never chosen.
std::set<NodeId> select_malicious(int n, int pnr_percent, std::optional<NodeId> excluded_hub, std::uint64_t seed);

struct ScenarioData {
  std::shared_ptr<const LabeledDataset> train;
  std::shared_ptr<const LabeledDataset> test;
};

/// Loads (and caches per process) the datasets a config refers to.
ScenarioData load_scenario_data(const ScenarioConfig& cfg);

struct RunOptions {
  /// Worker threads for per-node work inside a round. Results do not depend on it.
  int threads = 1;
  std::function<void(const RoundRecord&)> on_round;
};

/// Synchronous federation: local training, optional model poisoning, model
/// exchange, aggregation, optional topology rewiring, evaluation.
class Federation {
 public:
  Federation(const ScenarioConfig& cfg, const ScenarioData& data, RunOptions options = {});

  /// Runs the next round and returns its record.
  RoundRecord run_round();

  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const TopologyGraph& topology() const { return topology_; }
  const std::set<NodeId>& benign() const { return benign_; }
  const std::set<NodeId>& malicious() const { return malicious_; }
  int completed_rounds() const { return round_; }
  /// Id of the CFL server, if any.
  std::optional<NodeId> server() const { return server_; }

 private:
  void train_phase(std::vector<ModelParams>& shared, std::vector<ModelParams>& previous);
  void aggregate_dfl(const std::vector<ModelParams>& shared, const std::vector<ModelParams>& previous,
                     std::vector<ModelParams>& next, std::map<NodeId, std::set<NodeId>>& flagged);
  void aggregate_cfl(const std::vector<ModelParams>& shared, std::vector<ModelParams>& next);
  void apply_rewiring(const std::map<NodeId, std::set<NodeId>>& flagged);
  void evaluate_round(RoundRecord& rec) const;
  std::vector<NodeId> trainers() const;

  ScenarioConfig cfg_;
  RunOptions options_;
  TopologyGraph topology_;
  std::vector<NodeState> nodes_;
  std::set<NodeId> benign_;
  std::set<NodeId> malicious_;
  std::optional<NodeId> server_;
  std::shared_ptr<const LabeledDataset> test_;
  std::shared_ptr<const LabeledDataset> triggered_test_;
  std::shared_ptr<const LabeledDataset> root_data_;
  ReputationTable reputation_;
  TrainConfig train_template_;
  int round_ = 0;
};

struct ScenarioResult {
  std::vector<RoundRecord> records;
  std::set<NodeId> benign;
  std::set<NodeId> malicious;
  std::vector<ModelParams> final_models;
  TopologyGraph final_topology;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});
ScenarioResult run_scenario(const ScenarioConfig& cfg, const ScenarioData& data, const RunOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace dflsim

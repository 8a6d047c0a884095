#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "dflsim/aggregators.hpp"
#include "dflsim/attacks.hpp"
#include "dflsim/dataset.hpp"

namespace dflsim {

enum class Paradigm { cfl, dfl };
enum class TopologyKind { fully_connected, ring, star, watts_strogatz };
enum class DatasetKind { mnist, fashion_mnist, synthetic };

std::string_view to_string(Paradigm p);
std::string_view to_string(TopologyKind t);
std::string_view to_string(DatasetKind d);

struct TopologySpec {
  TopologyKind kind = TopologyKind::fully_connected;
  int k = 4;          // watts_strogatz mean degree
  double p = 0.3;     // watts_strogatz rewiring probability
  NodeId hub = 0;     // star hub (DFL only)
};

struct SyntheticSpec {
  int classes = 10;
  int per_class = 100;
  int test_per_class = 50;
  int dim = 16;
  double spread = 0.05;
  std::uint64_t seed = 7;
  std::optional<ImageShape> image_shape;
};

struct DatasetSpec {
  DatasetKind kind = DatasetKind::synthetic;
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  double subsample = 1.0;
  SyntheticSpec synthetic;
};

struct VoyagerSpec {
  bool enabled = false;
  double tau = 0.3;
};

/// Everything that determines one experiment. Results are a pure function of this struct.
struct ScenarioConfig {
  Paradigm paradigm = Paradigm::dfl;
  TopologySpec topology;
  int n_clients = 10;
  int rounds = 10;
  int epochs_per_round = 3;
  DatasetSpec dataset;
  /// Empty means {input_dim, 256, 128, label_count}.
  std::vector<int> architecture;
  double learning_rate = 0.1;
  int batch_size = 64;
  double holdout_fraction = 0.1;
  AttackSpec attack;
  int pnr_percent = 0;
  AggregatorSpec aggregator;
  VoyagerSpec voyager;
  /// Clean samples the CFL server keeps for its FLTrust reference update.
  int fltrust_root_size = 100;
  double bandwidth_mbps = 1.0;
  std::uint64_t master_seed = 1;

  bool voyager_active() const { return voyager.enabled || aggregator.kind == AggregatorKind::voyager; }
};

}  // namespace dflsim

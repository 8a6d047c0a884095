#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dflsim/dataset.hpp"
#include "dflsim/params.hpp"
#include "dflsim/topology.hpp"
#include "dflsim/voyager.hpp"

namespace dflsim {

/// What one node aggregates: its own freshly trained model, the model it
/// started the round with, and the models received from its neighbours.
/// Pointers are non-owning and must outlive the call.
struct AggregationInput {
  NodeId own_id = 0;
  const ModelParams* own_model = nullptr;
  const ModelParams* own_previous = nullptr;
  std::vector<ReceivedModel> neighbors;
  const LabeledDataset* local_validation = nullptr;
};

ModelParams fed_avg(const AggregationInput& input);

/// Selects the candidate whose summed squared distance to its n_c - f - 2
/// nearest peers is smallest. Without `f`, f = floor((n_c - 2) / 2).
ModelParams krum(const AggregationInput& input, std::optional<int> f = std::nullopt);

ModelParams coordinate_median(const AggregationInput& input);

/// Drops floor(beta * n_c) values at each end of every coordinate.
ModelParams trimmed_mean(const AggregationInput& input, double beta = 0.2);

/// Trust-weighted update averaging with the node's own update as the reference.
ModelParams fl_trust(const AggregationInput& input);

/// Layer-wise cosine filter, validation-loss weighting, norm clipping.
ModelParams sentinel(const AggregationInput& input, double sim_threshold = 0.5);

enum class AggregatorKind { fedavg, krum, median, trimmed_mean, fltrust, sentinel, voyager };

std::string_view to_string(AggregatorKind kind);
/// Throws InvalidArgument for unknown names.
AggregatorKind aggregator_kind_from_string(std::string_view name);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::fedavg;
  std::optional<int> krum_f;
  double trim_beta = 0.2;
  double sentinel_threshold = 0.5;
};

/// Dispatches on spec.kind. Voyager's model-space rule is FedAvg; its
/// topology defence lives in the engine.
ModelParams aggregate(const AggregatorSpec& spec, const AggregationInput& input);

/// Candidate models (own + neighbours) sorted by node id.
std::vector<ReceivedModel> sorted_candidates(const AggregationInput& input);

}  // namespace dflsim

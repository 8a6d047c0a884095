#include "dflsim/aggregators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dflsim/error.hpp"
#include "dflsim/learner.hpp"

namespace dflsim {

namespace {

constexpr double kLossFloor = 1e-3;

const ModelParams& own(const AggregationInput& input) {
  if (!input.own_model) throw InvalidArgument("aggregation input has no own model");
  return *input.own_model;
}

// Applies `reduce` to the sorted candidate values of every coordinate.
template <typename Reduce>
ModelParams coordinatewise(const std::vector<ReceivedModel>& cands, Reduce reduce) {
  ModelParams out(cands.front().second->arch());
  auto dst = out.values();
  std::vector<double> column(cands.size());
  for (std::size_t i = 0; i < dst.size(); ++i) {
    for (std::size_t k = 0; k < cands.size(); ++k) column[k] = cands[k].second->values()[i];
    std::sort(column.begin(), column.end());
    dst[i] = reduce(column);
  }
  return out;
}

}  // namespace

std::vector<ReceivedModel> sorted_candidates(const AggregationInput& input) {
  std::vector<ReceivedModel> cands;
  cands.reserve(input.neighbors.size() + 1);
  cands.emplace_back(input.own_id, &own(input));
  for (const auto& nb : input.neighbors) {
    if (!nb.second) throw InvalidArgument("null neighbour model");
    if (nb.first == input.own_id) throw InvalidArgument("neighbour list contains the aggregating node");
    require_same_arch(own(input), *nb.second);
    cands.push_back(nb);
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 1; k < cands.size(); ++k) {
    if (cands[k].first == cands[k - 1].first) throw InvalidArgument("duplicate neighbour id");
  }
  return cands;
}

ModelParams fed_avg(const AggregationInput& input) {
  if (input.neighbors.empty()) return own(input);
  const auto cands = sorted_candidates(input);
  std::vector<const ModelParams*> models;
  for (const auto& c : cands) models.push_back(c.second);
  const std::vector<double> weights(models.size(), 1.0);
  return weighted_sum(std::span<const ModelParams* const>(models), weights);
}

ModelParams krum(const AggregationInput& input, std::optional<int> f) {
  if (input.neighbors.empty()) return own(input);
  const auto cands = sorted_candidates(input);
  const int nc = static_cast<int>(cands.size());
  int byz = f.value_or((nc - 2) / 2);
  byz = std::max(0, std::min(byz, nc - 3));
  const int nearest = std::max(1, nc - byz - 2);

  std::vector<std::vector<double>> dist(nc, std::vector<double>(nc, 0.0));
  for (int a = 0; a < nc; ++a) {
    for (int b = a + 1; b < nc; ++b) {
      dist[a][b] = dist[b][a] = squared_l2_distance(*cands[a].second, *cands[b].second);
    }
  }
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> row;
  for (int a = 0; a < nc; ++a) {
    row.clear();
    for (int b = 0; b < nc; ++b) {
      if (b != a) row.push_back(dist[a][b]);
    }
    std::sort(row.begin(), row.end());
    double score = 0.0;
    for (int j = 0; j < nearest; ++j) score += row[j];
    if (score < best_score) {
      best_score = score;
      best = a;
    }
  }
  return *cands[best].second;
}

ModelParams coordinate_median(const AggregationInput& input) {
  if (input.neighbors.empty()) return own(input);
  const auto cands = sorted_candidates(input);
  return coordinatewise(cands, [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  });
}

ModelParams trimmed_mean(const AggregationInput& input, double beta) {
  if (!(beta >= 0.0 && beta < 0.5)) throw InvalidArgument("trimmed_mean: beta must be in [0, 0.5)");
  if (input.neighbors.empty()) return own(input);
  const auto cands = sorted_candidates(input);
  const auto nc = cands.size();
  const auto k = static_cast<std::size_t>(std::floor(beta * static_cast<double>(nc)));
  if (nc < 2 * k + 1) throw InvalidArgument("trimmed_mean: trimming removes every candidate");
  return coordinatewise(cands, [k](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = k; i < v.size() - k; ++i) s += v[i];
    return s / static_cast<double>(v.size() - 2 * k);
  });
}

ModelParams fl_trust(const AggregationInput& input) {
  if (!input.own_previous) throw InvalidArgument("fl_trust needs the model from before local training");
  const ModelParams& mine = own(input);
  if (input.neighbors.empty()) return mine;
  const ModelParams& prev = *input.own_previous;
  require_same_arch(mine, prev);

  const auto cands = sorted_candidates(input);
  const ModelParams reference = subtract(mine, prev);
  const double ref_norm = l2_norm(reference);

  ModelParams acc = reference;
  double trust_total = 1.0;
  for (const auto& [id, model] : cands) {
    if (id == input.own_id) continue;
    ModelParams update = subtract(*model, prev);
    const double trust = std::max(0.0, cosine_similarity(reference.values(), update.values()));
    if (trust == 0.0) continue;
    const double scale = trust * ref_norm / l2_norm(update);
    auto a = acc.values();
    auto u = update.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += scale * u[i];
    trust_total += trust;
  }
  if (trust_total == 1.0) return mine;
  for (double& x : acc.values()) x /= trust_total;
  return add_scaled(prev, acc, 1.0);
}

ModelParams sentinel(const AggregationInput& input, double sim_threshold) {
  if (!input.local_validation || input.local_validation->empty()) {
    throw InvalidArgument("sentinel needs a non-empty local validation set");
  }
  const ModelParams& mine = own(input);
  if (input.neighbors.empty()) return mine;
  const auto cands = sorted_candidates(input);

  std::vector<const ModelParams*> survivors;
  for (const auto& [id, model] : cands) {
    if (id == input.own_id) continue;
    double sim = 0.0;
    for (std::size_t l = 0; l < mine.layer_count(); ++l) sim += cosine_similarity(mine.layer(l), model->layer(l));
    sim /= static_cast<double>(mine.layer_count());
    if (sim >= sim_threshold) survivors.push_back(model);
  }
  if (survivors.empty()) return mine;

  const LabeledDataset& val = *input.local_validation;
  const double own_loss = mean_cross_entropy(mine, val);
  const double max_norm = l2_norm(mine);

  std::vector<ModelParams> clipped;
  clipped.reserve(survivors.size() + 1);
  std::vector<double> weights;
  clipped.push_back(mine);
  weights.push_back(1.0);
  for (const auto* model : survivors) {
    const double loss = mean_cross_entropy(*model, val);
    // Loss distance relative to the node's own loss, so the mapping adapts as training converges.
    const double distance = std::isfinite(loss) ? std::max(0.0, loss - own_loss) / std::max(own_loss, kLossFloor)
                                                : std::numeric_limits<double>::infinity();
    weights.push_back(1.0 / (1.0 + distance));
    clipped.push_back(max_norm > 0.0 ? clip_to_norm(*model, max_norm) : *model);
  }
  return weighted_sum(std::span<const ModelParams>(clipped), weights);
}

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::fedavg: return "fedavg";
    case AggregatorKind::krum: return "krum";
    case AggregatorKind::median: return "median";
    case AggregatorKind::trimmed_mean: return "trimmed_mean";
    case AggregatorKind::fltrust: return "fltrust";
    case AggregatorKind::sentinel: return "sentinel";
    case AggregatorKind::voyager: return "voyager";
  }
  return "fedavg";
}

AggregatorKind aggregator_kind_from_string(std::string_view name) {
  for (auto k : {AggregatorKind::fedavg, AggregatorKind::krum, AggregatorKind::median,
                 AggregatorKind::trimmed_mean, AggregatorKind::fltrust, AggregatorKind::sentinel,
                 AggregatorKind::voyager}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown aggregator '" + std::string(name) + "'");
}

ModelParams aggregate(const AggregatorSpec& spec, const AggregationInput& input) {
  switch (spec.kind) {
    case AggregatorKind::fedavg:
    case AggregatorKind::voyager: return fed_avg(input);
    case AggregatorKind::krum: return krum(input, spec.krum_f);
    case AggregatorKind::median: return coordinate_median(input);
    case AggregatorKind::trimmed_mean: return trimmed_mean(input, spec.trim_beta);
    case AggregatorKind::fltrust: return fl_trust(input);
    case AggregatorKind::sentinel: return sentinel(input, spec.sentinel_threshold);
  }
  throw InvalidArgument("unhandled aggregator");
}

}  // namespace dflsim

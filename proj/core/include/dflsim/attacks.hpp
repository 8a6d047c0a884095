#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dflsim/dataset.hpp"
#include "dflsim/params.hpp"

namespace dflsim {

enum class AttackKind {
  none,
  untargeted_label_flip,
  untargeted_sample_poison,
  random_model_poison,
  targeted_label_flip,
  backdoor,
};

std::string_view to_string(AttackKind kind);
/// Throws InvalidArgument for unknown names.
AttackKind attack_kind_from_string(std::string_view name);

bool is_data_attack(AttackKind kind);
bool is_model_attack(AttackKind kind);

/// How the model-poisoning noise is scaled.
enum class ModelNoiseScale {
  /// std = noise_ratio (same units as the parameters).
  absolute,
  /// std = noise_ratio * (standard deviation of the layer's parameters).
  layer_relative,
  /// variance = 100 * noise_ratio, i.e. the ratio read as a percentage.
  percent_variance,
};

std::string_view to_string(ModelNoiseScale scale);
ModelNoiseScale model_noise_scale_from_string(std::string_view name);

/// X watermark stamped into the top-right corner.
struct TriggerSpec {
  int size = 10;
  double intensity = 1.0;
};

struct AttackSpec {
  AttackKind kind = AttackKind::none;
  double noise_ratio = 0.3;
  ModelNoiseScale model_noise = ModelNoiseScale::percent_variance;
  /// Malicious nodes draw the same model noise in a round.
  bool colluding = true;
  int source_label = 7;
  int target_label = 4;
  TriggerSpec trigger;
};

/// Every label is replaced by a uniform draw from the other labels.
LabeledDataset flip_labels_untargeted(const LabeledDataset& ds, std::uint64_t seed);

/// x <- clamp(x + noise_ratio * N(0,1), 0, 1) for every feature.
LabeledDataset poison_samples_gaussian(const LabeledDataset& ds, double noise_ratio, std::uint64_t seed);

/// Adds Gaussian noise to every parameter; see ModelNoiseScale.
ModelParams poison_model_gaussian(const ModelParams& p, double noise_ratio, std::uint64_t seed,
                                  ModelNoiseScale scale = ModelNoiseScale::layer_relative);

/// Relabels every `source` sample as `target`.
LabeledDataset flip_labels_targeted(const LabeledDataset& ds, int source, int target);

/// Stamps the trigger on every sample whose label is `target`.
LabeledDataset implant_backdoor(const LabeledDataset& ds, const TriggerSpec& spec, int target);

/// Stamps the trigger on every sample; labels keep their ground truth.
LabeledDataset apply_trigger_all(const LabeledDataset& ds, const TriggerSpec& spec);

/// Row-major pixel indices covered by the trigger for an image of `shape`.
std::vector<std::size_t> trigger_pixels(const ImageShape& shape, const TriggerSpec& spec);

}  // namespace dflsim

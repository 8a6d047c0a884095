#include "dflsim/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::none: return "none";
    case AttackKind::untargeted_label_flip: return "untargeted_label_flip";
    case AttackKind::untargeted_sample_poison: return "untargeted_sample_poison";
    case AttackKind::random_model_poison: return "random_model_poison";
    case AttackKind::targeted_label_flip: return "targeted_label_flip";
    case AttackKind::backdoor: return "backdoor";
  }
  return "none";
}

AttackKind attack_kind_from_string(std::string_view name) {
  for (auto k : {AttackKind::none, AttackKind::untargeted_label_flip, AttackKind::untargeted_sample_poison,
                 AttackKind::random_model_poison, AttackKind::targeted_label_flip, AttackKind::backdoor}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown attack kind '" + std::string(name) + "'");
}

bool is_data_attack(AttackKind kind) {
  return kind == AttackKind::untargeted_label_flip || kind == AttackKind::untargeted_sample_poison ||
         kind == AttackKind::targeted_label_flip || kind == AttackKind::backdoor;
}

bool is_model_attack(AttackKind kind) { return kind == AttackKind::random_model_poison; }

std::string_view to_string(ModelNoiseScale scale) {
  switch (scale) {
    case ModelNoiseScale::absolute: return "absolute";
    case ModelNoiseScale::layer_relative: return "layer_relative";
    case ModelNoiseScale::percent_variance: return "percent_variance";
  }
  return "layer_relative";
}

ModelNoiseScale model_noise_scale_from_string(std::string_view name) {
  if (name == "absolute") return ModelNoiseScale::absolute;
  if (name == "layer_relative") return ModelNoiseScale::layer_relative;
  if (name == "percent_variance") return ModelNoiseScale::percent_variance;
  throw InvalidArgument("unknown model noise scale '" + std::string(name) + "'");
}

LabeledDataset flip_labels_untargeted(const LabeledDataset& ds, std::uint64_t seed) {
  if (ds.label_count < 2) throw InvalidArgument("untargeted label flipping needs at least two labels");
  LabeledDataset out = ds;
  Engine rng(seed);
  std::uniform_int_distribution<int> pick(0, ds.label_count - 2);
  for (int& y : out.labels) {
    const int r = pick(rng);
    y = r >= y ? r + 1 : r;
  }
  return out;
}

LabeledDataset poison_samples_gaussian(const LabeledDataset& ds, double noise_ratio, std::uint64_t seed) {
  if (!(noise_ratio >= 0.0)) throw InvalidArgument("noise_ratio must be nonnegative");
  LabeledDataset out = ds;
  if (noise_ratio == 0.0) return out;
  Engine rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double* x = out.features.data();
  const auto n = out.features.size();
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::clamp(x[i] + noise_ratio * gauss(rng), 0.0, 1.0);
  return out;
}

ModelParams poison_model_gaussian(const ModelParams& p, double noise_ratio, std::uint64_t seed,
                                  ModelNoiseScale scale) {
  if (!(noise_ratio >= 0.0)) throw InvalidArgument("noise_ratio must be nonnegative");
  ModelParams out = p;
  if (noise_ratio == 0.0) return out;
  Engine rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t l = 0; l < out.layer_count(); ++l) {
    auto layer = out.layer(l);
    double sigma = noise_ratio;
    if (scale == ModelNoiseScale::percent_variance) sigma = std::sqrt(100.0 * noise_ratio);
    if (scale == ModelNoiseScale::layer_relative) {
      double mean = 0.0;
      for (double w : layer) mean += w;
      mean /= static_cast<double>(layer.size());
      double var = 0.0;
      for (double w : layer) var += (w - mean) * (w - mean);
      sigma = noise_ratio * std::sqrt(var / static_cast<double>(layer.size()));
    }
    if (sigma == 0.0) continue;
    for (double& w : layer) w += sigma * gauss(rng);
  }
  return out;
}

LabeledDataset flip_labels_targeted(const LabeledDataset& ds, int source, int target) {
  if (source == target) throw InvalidArgument("source and target labels must differ");
  if (source < 0 || target < 0 || source >= ds.label_count || target >= ds.label_count) {
    throw InvalidArgument("source/target label out of range");
  }
  LabeledDataset out = ds;
  for (int& y : out.labels) {
    if (y == source) y = target;
  }
  return out;
}

std::vector<std::size_t> trigger_pixels(const ImageShape& shape, const TriggerSpec& spec) {
  if (spec.size < 1 || spec.size > std::min(shape.height, shape.width)) {
    throw InvalidArgument("trigger size must be between 1 and the image side");
  }
  if (!(spec.intensity >= 0.0 && spec.intensity <= 1.0)) {
    throw InvalidArgument("trigger intensity must be in [0,1]");
  }
  std::set<std::size_t> pixels;
  const int col0 = shape.width - spec.size;
  for (int i = 0; i < spec.size; ++i) {
    const auto row = static_cast<std::size_t>(i);
    pixels.insert(row * shape.width + static_cast<std::size_t>(col0 + i));
    pixels.insert(row * shape.width + static_cast<std::size_t>(col0 + spec.size - 1 - i));
  }
  return {pixels.begin(), pixels.end()};
}

namespace {

LabeledDataset stamp(const LabeledDataset& ds, const TriggerSpec& spec, const int* only_label) {
  if (!ds.image_shape) throw InvalidArgument("trigger needs an image shape");
  const auto pixels = trigger_pixels(*ds.image_shape, spec);
  LabeledDataset out = ds;
  for (Eigen::Index r = 0; r < out.features.rows(); ++r) {
    if (only_label && out.labels[static_cast<std::size_t>(r)] != *only_label) continue;
    for (auto px : pixels) out.features(r, static_cast<Eigen::Index>(px)) = spec.intensity;
  }
  return out;
}

}  // namespace

LabeledDataset implant_backdoor(const LabeledDataset& ds, const TriggerSpec& spec, int target) {
  if (target < 0 || target >= ds.label_count) throw InvalidArgument("backdoor target label out of range");
  return stamp(ds, spec, &target);
}

LabeledDataset apply_trigger_all(const LabeledDataset& ds, const TriggerSpec& spec) {
  return stamp(ds, spec, nullptr);
}

}  // namespace dflsim

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dflsim/confusion_matrix.hpp"
#include "dflsim/dataset.hpp"
#include "dflsim/params.hpp"

namespace dflsim {

/// Dense ReLU network with a softmax output. layer_sizes = {input, hidden..., output}.
struct MlpArchitecture {
  std::vector<int> layer_sizes;

  /// The 784-256-128-10 classifier used for MNIST-format data.
  static MlpArchitecture mnist() { return {{784, 256, 128, 10}}; }

  void validate() const;
  ArchTag tag() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

struct TrainConfig {
  int epochs = 3;
  double learning_rate = 0.1;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

/// Glorot-uniform weights, zero biases.
ModelParams init_model(const MlpArchitecture& arch, std::uint64_t seed);

/// `epochs` passes of shuffled mini-batch SGD on mean softmax cross-entropy.
/// Throws TrainingDiverged on a non-finite batch loss.
ModelParams train(const ModelParams& p, const LabeledDataset& ds, const TrainConfig& cfg);

/// Output logits for a batch of rows.
RowMatrix forward_logits(const ModelParams& p, const RowMatrix& x);

/// argmax of the logits; ties go to the lowest label.
int predict(const ModelParams& p, std::span<const double> x);

ConfusionMatrix evaluate(const ModelParams& p, const LabeledDataset& ds);

/// Mean cross-entropy over the whole dataset.
double mean_cross_entropy(const ModelParams& p, const LabeledDataset& ds);

struct LossAndGradient {
  double loss = 0.0;
  ModelParams gradient;
};

/// Mean cross-entropy over the rows `indices` and its gradient w.r.t. every parameter.
LossAndGradient loss_and_gradient(const ModelParams& p, const LabeledDataset& ds,
                                  std::span<const std::size_t> indices);

}  // namespace dflsim

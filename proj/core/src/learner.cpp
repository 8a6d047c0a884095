#include "dflsim/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

namespace {

using ConstRowRef = Eigen::Ref<const RowMatrix>;

constexpr Eigen::Index kEvalChunk = 2048;

void require_input_dim(const ModelParams& p, int dim) {
  if (p.layer_count() == 0) throw ShapeMismatch("model has no layers");
  if (p.arch().front().in != dim) {
    throw ShapeMismatch("feature dimension " + std::to_string(dim) + " does not match model input " +
                        std::to_string(p.arch().front().in));
  }
}

// Forward pass. When `acts` is given it receives the post-activation output of
// every hidden layer (index 0 = first hidden layer). Returns the logits.
RowMatrix forward(const ModelParams& p, const ConstRowRef& x, std::vector<RowMatrix>* acts) {
  const std::size_t layers = p.layer_count();
  if (acts) acts->resize(layers - 1);
  RowMatrix cur;
  for (std::size_t l = 0; l < layers; ++l) {
    RowMatrix z(x.rows(), p.arch()[l].out);
    if (l == 0) {
      z.noalias() = x * p.weights(l).transpose();
    } else {
      z.noalias() = cur * p.weights(l).transpose();
    }
    z.rowwise() += p.bias(l).transpose();
    if (l + 1 < layers) {
      z = z.cwiseMax(0.0);
      if (acts) (*acts)[l] = z;
    }
    cur = std::move(z);
  }
  return cur;
}

// Row-wise log-sum-exp with max subtraction.
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  const double m = row.maxCoeff();
  return m + std::log((row.array() - m).exp().sum());
}

int argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

// Computes the mean loss of a batch and writes the gradient into `grad`.
// `acts` and `delta` are scratch buffers reused across calls.
double batch_gradient(const ModelParams& p, const ConstRowRef& x, std::span<const int> y,
                      ModelParams& grad, std::vector<RowMatrix>& acts, RowMatrix& delta) {
  const std::size_t layers = p.layer_count();
  const auto batch = static_cast<double>(x.rows());
  RowMatrix logits = forward(p, x, &acts);

  double loss = 0.0;
  delta.resize(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double lse = log_sum_exp(logits.row(r));
    loss += lse - logits(r, y[static_cast<std::size_t>(r)]);
    delta.row(r) = (logits.row(r).array() - lse).exp();
    delta(r, y[static_cast<std::size_t>(r)]) -= 1.0;
  }
  delta /= batch;
  loss /= batch;

  for (std::size_t l = layers; l-- > 0;) {
    const ConstRowRef input = (l == 0) ? x : ConstRowRef(acts[l - 1]);
    grad.weights(l).noalias() = delta.transpose() * input;
    grad.bias(l) = delta.colwise().sum().transpose();
    if (l > 0) {
      RowMatrix back(delta.rows(), p.arch()[l].in);
      back.noalias() = delta * p.weights(l);
      delta = back.cwiseProduct((acts[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

}  // namespace

void MlpArchitecture::validate() const {
  if (layer_sizes.size() < 2) throw InvalidArgument("architecture needs at least input and output sizes");
  for (int s : layer_sizes) {
    if (s <= 0) throw InvalidArgument("layer sizes must be positive");
  }
}

ArchTag MlpArchitecture::tag() const {
  validate();
  ArchTag tag;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    tag.push_back(LayerShape{layer_sizes[i + 1], layer_sizes[i]});
  }
  return tag;
}

ModelParams init_model(const MlpArchitecture& arch, std::uint64_t seed) {
  ModelParams p(arch.tag());
  Engine rng(seed);
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const auto& s = p.arch()[l];
    const double bound = std::sqrt(6.0 / (s.in + s.out));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto w = p.weights(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
    }
  }
  return p;
}

ModelParams train(const ModelParams& p, const LabeledDataset& ds, const TrainConfig& cfg) {
  if (cfg.epochs < 1 || cfg.batch_size < 1) throw InvalidArgument("epochs and batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw InvalidArgument("learning rate must be nonnegative");
  if (ds.empty()) throw InvalidArgument("cannot train on an empty dataset");
  require_input_dim(p, ds.dim());
  if (p.arch().back().out != ds.label_count) throw ShapeMismatch("model output size differs from label count");
  if (cfg.learning_rate == 0.0) return p;

  ModelParams model = p;
  ModelParams grad(p.arch());
  std::vector<RowMatrix> acts;
  RowMatrix delta;
  RowMatrix xb;
  std::vector<int> yb;

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(cfg.seed);
  const auto n = order.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      xb.resize(static_cast<Eigen::Index>(len), ds.features.cols());
      yb.resize(len);
      for (std::size_t r = 0; r < len; ++r) {
        const auto src = order[start + r];
        xb.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(src));
        yb[r] = ds.labels[src];
      }
      const double loss = batch_gradient(model, xb, yb, grad, acts, delta);
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite training loss in epoch " + std::to_string(epoch + 1));
      }
      auto mv = model.values();
      auto gv = grad.values();
      for (std::size_t i = 0; i < mv.size(); ++i) mv[i] -= cfg.learning_rate * gv[i];
    }
  }
  if (!model.all_finite()) throw TrainingDiverged("non-finite parameters after training");
  return model;
}

RowMatrix forward_logits(const ModelParams& p, const RowMatrix& x) {
  require_input_dim(p, static_cast<int>(x.cols()));
  return forward(p, x, nullptr);
}

int predict(const ModelParams& p, std::span<const double> x) {
  require_input_dim(p, static_cast<int>(x.size()));
  Eigen::Map<const RowMatrix> row(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  RowMatrix logits = forward(p, row, nullptr);
  return argmax_lowest(logits.row(0));
}

ConfusionMatrix evaluate(const ModelParams& p, const LabeledDataset& ds) {
  if (ds.empty()) throw InvalidArgument("cannot evaluate on an empty dataset");
  require_input_dim(p, ds.dim());
  ConfusionMatrix cm(ds.label_count);
  const Eigen::Index n = ds.features.rows();
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    RowMatrix logits = forward(p, ds.features.middleRows(start, len), nullptr);
    for (Eigen::Index r = 0; r < len; ++r) {
      const int pred = argmax_lowest(logits.row(r));
      if (pred >= ds.label_count) throw ShapeMismatch("model predicts a label outside the dataset");
      cm.add(ds.labels[static_cast<std::size_t>(start + r)], pred);
    }
  }
  return cm;
}

double mean_cross_entropy(const ModelParams& p, const LabeledDataset& ds) {
  if (ds.empty()) throw InvalidArgument("cannot compute loss on an empty dataset");
  require_input_dim(p, ds.dim());
  double total = 0.0;
  const Eigen::Index n = ds.features.rows();
  for (Eigen::Index start = 0; start < n; start += kEvalChunk) {
    const Eigen::Index len = std::min(kEvalChunk, n - start);
    RowMatrix logits = forward(p, ds.features.middleRows(start, len), nullptr);
    for (Eigen::Index r = 0; r < len; ++r) {
      total += log_sum_exp(logits.row(r)) - logits(r, ds.labels[static_cast<std::size_t>(start + r)]);
    }
  }
  return total / static_cast<double>(n);
}

LossAndGradient loss_and_gradient(const ModelParams& p, const LabeledDataset& ds,
                                  std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("empty batch");
  require_input_dim(p, ds.dim());
  LabeledDataset batch = ds.select(indices);
  LossAndGradient out{0.0, ModelParams(p.arch())};
  std::vector<RowMatrix> acts;
  RowMatrix delta;
  out.loss = batch_gradient(p, batch.features, batch.labels, out.gradient, acts, delta);
  return out;
}

}  // namespace dflsim

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace dflsim {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LayerShape {
  int out = 0;
  int in = 0;

  std::size_t weight_count() const { return static_cast<std::size_t>(out) * in; }
  std::size_t count() const { return weight_count() + static_cast<std::size_t>(out); }
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Layer shapes of a model. Two models are compatible iff their tags compare equal.
using ArchTag = std::vector<LayerShape>;

/// Parameters of one dense network, stored flat in the canonical order:
/// layer by layer, each layer's weight matrix row-major (out x in) followed by
/// its bias vector (out). flatten() is therefore a copy of the storage.
class ModelParams {
 public:
  ModelParams() = default;
  /// Zero-initialised model for the given layer shapes.
  explicit ModelParams(ArchTag arch);
  /// Adopts `values`; throws ShapeMismatch if the length does not match `arch`.
  ModelParams(ArchTag arch, std::vector<double> values);

  const ArchTag& arch() const { return arch_; }
  std::size_t layer_count() const { return arch_.size(); }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// All parameters (weights then bias) of layer `l`.
  std::span<const double> layer(std::size_t l) const;
  std::span<double> layer(std::size_t l);

  Eigen::Map<const RowMatrix> weights(std::size_t l) const;
  Eigen::Map<RowMatrix> weights(std::size_t l);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l);

  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::size_t offset(std::size_t l) const { return offsets_[l]; }

  ArchTag arch_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

std::size_t parameter_count(const ArchTag& arch);

std::vector<double> flatten(const ModelParams& p);
ModelParams unflatten(const ArchTag& arch, std::span<const double> flat);

/// Throws ShapeMismatch unless both models share an architecture tag.
void require_same_arch(const ModelParams& a, const ModelParams& b);

double l2_norm(std::span<const double> v);
double l2_norm(const ModelParams& p);
double dot(std::span<const double> a, std::span<const double> b);

double l2_distance(const ModelParams& a, const ModelParams& b);
double squared_l2_distance(const ModelParams& a, const ModelParams& b);

/// dot(a,b) / (|a| |b|), or 0 when either norm is zero.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// Coordinate-wise sum(w_i * m_i) / sum(w_i).
ModelParams weighted_sum(std::span<const ModelParams* const> models, std::span<const double> weights);
ModelParams weighted_sum(std::span<const ModelParams> models, std::span<const double> weights);

/// Scales `p` down so its flattened norm is at most `max_norm`.
ModelParams clip_to_norm(const ModelParams& p, double max_norm);

/// a - b and a + scale * b, coordinate-wise.
ModelParams subtract(const ModelParams& a, const ModelParams& b);
ModelParams add_scaled(const ModelParams& a, const ModelParams& b, double scale);

}  // namespace dflsim

#include "dflsim/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dflsim/error.hpp"

namespace dflsim {

std::size_t parameter_count(const ArchTag& arch) {
  std::size_t total = 0;
  for (const auto& s : arch) total += s.count();
  return total;
}

ModelParams::ModelParams(ArchTag arch) : ModelParams(arch, std::vector<double>(parameter_count(arch), 0.0)) {}

ModelParams::ModelParams(ArchTag arch, std::vector<double> values)
    : arch_(std::move(arch)), values_(std::move(values)) {
  std::size_t total = 0;
  offsets_.reserve(arch_.size());
  for (const auto& s : arch_) {
    if (s.out <= 0 || s.in <= 0) throw InvalidArgument("layer dimensions must be positive");
    offsets_.push_back(total);
    total += s.count();
  }
  if (total != values_.size()) {
    throw ShapeMismatch("parameter vector has " + std::to_string(values_.size()) +
                        " entries, architecture needs " + std::to_string(total));
  }
}

std::span<const double> ModelParams::layer(std::size_t l) const {
  return std::span<const double>(values_).subspan(offset(l), arch_[l].count());
}

std::span<double> ModelParams::layer(std::size_t l) {
  return std::span<double>(values_).subspan(offset(l), arch_[l].count());
}

Eigen::Map<const RowMatrix> ModelParams::weights(std::size_t l) const {
  return {values_.data() + offset(l), arch_[l].out, arch_[l].in};
}

Eigen::Map<RowMatrix> ModelParams::weights(std::size_t l) {
  return {values_.data() + offset(l), arch_[l].out, arch_[l].in};
}

Eigen::Map<const Eigen::VectorXd> ModelParams::bias(std::size_t l) const {
  return {values_.data() + offset(l) + arch_[l].weight_count(), arch_[l].out};
}

Eigen::Map<Eigen::VectorXd> ModelParams::bias(std::size_t l) {
  return {values_.data() + offset(l) + arch_[l].weight_count(), arch_[l].out};
}

bool ModelParams::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> flatten(const ModelParams& p) {
  auto v = p.values();
  return {v.begin(), v.end()};
}

ModelParams unflatten(const ArchTag& arch, std::span<const double> flat) {
  return ModelParams(arch, std::vector<double>(flat.begin(), flat.end()));
}

void require_same_arch(const ModelParams& a, const ModelParams& b) {
  if (a.arch() != b.arch()) throw ShapeMismatch("models have different architectures");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("vector length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double l2_norm(const ModelParams& p) { return l2_norm(p.values()); }

double squared_l2_distance(const ModelParams& a, const ModelParams& b) {
  require_same_arch(a, b);
  auto x = a.values();
  auto y = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double l2_distance(const ModelParams& a, const ModelParams& b) {
  return std::sqrt(squared_l2_distance(a, b));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("vector length mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  const double c = ab / (std::sqrt(aa) * std::sqrt(bb));
  return std::clamp(c, -1.0, 1.0);
}

ModelParams weighted_sum(std::span<const ModelParams* const> models, std::span<const double> weights) {
  if (models.empty()) throw InvalidArgument("weighted_sum of an empty model set");
  if (models.size() != weights.size()) throw InvalidArgument("models and weights differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw InvalidArgument("weights sum to zero");
  for (const auto* m : models) require_same_arch(*models.front(), *m);

  ModelParams out(models.front()->arch());
  auto acc = out.values();
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    auto v = models[k]->values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
  }
  for (double& x : acc) x /= total;
  return out;
}

ModelParams weighted_sum(std::span<const ModelParams> models, std::span<const double> weights) {
  std::vector<const ModelParams*> ptrs;
  ptrs.reserve(models.size());
  for (const auto& m : models) ptrs.push_back(&m);
  return weighted_sum(std::span<const ModelParams* const>(ptrs), weights);
}

ModelParams clip_to_norm(const ModelParams& p, double max_norm) {
  if (!(max_norm > 0.0)) throw InvalidArgument("max_norm must be positive");
  const double n = l2_norm(p);
  if (n <= max_norm) return p;
  ModelParams out = p;
  const double scale = max_norm / n;
  for (double& x : out.values()) x *= scale;
  return out;
}

ModelParams subtract(const ModelParams& a, const ModelParams& b) { return add_scaled(a, b, -1.0); }

ModelParams add_scaled(const ModelParams& a, const ModelParams& b, double scale) {
  require_same_arch(a, b);
  ModelParams out = a;
  auto o = out.values();
  auto y = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += scale * y[i];
  return out;
}

}  // namespace dflsim

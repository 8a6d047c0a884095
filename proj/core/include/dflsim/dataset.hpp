#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dflsim/params.hpp"

namespace dflsim {

struct ImageShape {
  int height = 0;
  int width = 0;
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Feature matrix (one sample per row, values in [0,1]) with integer labels.
struct LabeledDataset {
  RowMatrix features;
  std::vector<int> labels;
  int label_count = 0;
  std::optional<ImageShape> image_shape;

  std::size_t size() const { return labels.size(); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool empty() const { return labels.empty(); }

  /// Rows `indices`, in that order.
  LabeledDataset select(std::span<const std::size_t> indices) const;

  /// Throws InvalidArgument if any invariant is broken.
  void validate() const;
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixel bytes are scaled by 1/255; ten classes are assumed.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

/// Gaussian blobs around one-hot(c) * 0.8 + 0.1, clamped to [0,1].
LabeledDataset synthetic_blobs(int classes, int per_class, int dim, double spread, std::uint64_t seed);

/// Shuffle, then cut into `n_nodes` contiguous shards whose sizes differ by at most one.
std::vector<LabeledDataset> partition_iid(const LabeledDataset& ds, int n_nodes, std::uint64_t seed);

/// Random split with round(frac * n) validation samples. Both sides keep the
/// original relative order of their samples.
std::pair<LabeledDataset, LabeledDataset> holdout_split(const LabeledDataset& ds, double frac,
                                                        std::uint64_t seed);

/// First round(frac * n) samples; frac in (0,1].
LabeledDataset take_prefix(const LabeledDataset& ds, double frac);

}  // namespace dflsim

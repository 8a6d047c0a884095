#include "dflsim/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "dflsim/error.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError("truncated IDX header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

LabeledDataset LabeledDataset::select(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.label_count = label_count;
  out.image_shape = image_shape;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(indices[r]));
    out.labels[r] = labels[indices[r]];
  }
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw InvalidArgument("feature rows and label count differ");
  }
  if (label_count < 1) throw InvalidArgument("label_count must be positive");
  for (int y : labels) {
    if (y < 0 || y >= label_count) throw InvalidArgument("label out of range");
  }
  if (features.size() > 0 && (features.minCoeff() < 0.0 || features.maxCoeff() > 1.0)) {
    throw InvalidArgument("features must lie in [0,1]");
  }
  if (image_shape && image_shape->height * image_shape->width != features.cols()) {
    throw InvalidArgument("image shape does not match feature dimension");
  }
}

LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  auto img = open_binary(images_path);
  if (read_be32(img, images_path) != kImageMagic) {
    throw FormatError("bad IDX image magic in " + images_path.string());
  }
  const std::uint32_t n_images = read_be32(img, images_path);
  const std::uint32_t rows = read_be32(img, images_path);
  const std::uint32_t cols = read_be32(img, images_path);

  auto lab = open_binary(labels_path);
  if (read_be32(lab, labels_path) != kLabelMagic) {
    throw FormatError("bad IDX label magic in " + labels_path.string());
  }
  const std::uint32_t n_labels = read_be32(lab, labels_path);
  if (n_images != n_labels) {
    throw FormatError("image/label count mismatch: " + std::to_string(n_images) + " vs " +
                      std::to_string(n_labels));
  }

  const std::size_t dim = std::size_t{rows} * cols;
  std::vector<unsigned char> pixels(std::size_t{n_images} * dim);
  if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()))) {
    throw FormatError("truncated IDX image data in " + images_path.string());
  }
  std::vector<unsigned char> raw_labels(n_labels);
  if (!lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(n_labels))) {
    throw FormatError("truncated IDX label data in " + labels_path.string());
  }

  LabeledDataset ds;
  ds.label_count = 10;
  ds.image_shape = ImageShape{static_cast<int>(rows), static_cast<int>(cols)};
  ds.features.resize(n_images, static_cast<Eigen::Index>(dim));
  double* dst = ds.features.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) dst[i] = pixels[i] / 255.0;
  ds.labels.reserve(n_labels);
  for (unsigned char y : raw_labels) {
    if (y >= 10) throw FormatError("label " + std::to_string(y) + " out of range in " + labels_path.string());
    ds.labels.push_back(y);
  }
  return ds;
}

LabeledDataset synthetic_blobs(int classes, int per_class, int dim, double spread, std::uint64_t seed) {
  if (classes < 2 || per_class < 1 || dim < classes || !(spread >= 0.0)) {
    throw InvalidArgument("synthetic_blobs: need classes >= 2, per_class >= 1, dim >= classes, spread >= 0");
  }
  Engine rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LabeledDataset ds;
  ds.label_count = classes;
  ds.features.resize(static_cast<Eigen::Index>(classes) * per_class, dim);
  ds.labels.reserve(static_cast<std::size_t>(classes) * per_class);
  Eigen::Index row = 0;
  for (int c = 0; c < classes; ++c) {
    for (int k = 0; k < per_class; ++k, ++row) {
      for (int j = 0; j < dim; ++j) {
        const double center = (j == c ? 0.9 : 0.1);
        const double noise = spread > 0.0 ? spread * gauss(rng) : 0.0;
        ds.features(row, j) = std::clamp(center + noise, 0.0, 1.0);
      }
      ds.labels.push_back(c);
    }
  }
  return ds;
}

std::vector<LabeledDataset> partition_iid(const LabeledDataset& ds, int n_nodes, std::uint64_t seed) {
  if (n_nodes < 1) throw InvalidArgument("partition_iid: n_nodes must be >= 1");
  if (static_cast<std::size_t>(n_nodes) > ds.size()) {
    throw InvalidArgument("partition_iid: more nodes than samples");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t base = ds.size() / n_nodes;
  const std::size_t extra = ds.size() % n_nodes;
  std::vector<LabeledDataset> shards;
  shards.reserve(n_nodes);
  std::size_t begin = 0;
  for (int k = 0; k < n_nodes; ++k) {
    const std::size_t len = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
    shards.push_back(ds.select(std::span<const std::size_t>(order).subspan(begin, len)));
    begin += len;
  }
  return shards;
}

std::pair<LabeledDataset, LabeledDataset> holdout_split(const LabeledDataset& ds, double frac,
                                                        std::uint64_t seed) {
  if (!(frac > 0.0 && frac < 1.0)) throw InvalidArgument("holdout_split: frac must be in (0,1)");
  const auto n_val = static_cast<std::size_t>(std::llround(frac * static_cast<double>(ds.size())));
  if (n_val == 0 || n_val >= ds.size()) throw InvalidArgument("holdout_split: a split would be empty");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {ds.select(train), ds.select(val)};
}

LabeledDataset take_prefix(const LabeledDataset& ds, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw InvalidArgument("subsample fraction must be in (0,1]");
  if (frac == 1.0) return ds;
  const auto n = static_cast<std::size_t>(std::llround(frac * static_cast<double>(ds.size())));
  if (n == 0) throw InvalidArgument("subsample fraction leaves no samples");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return ds.select(idx);
}

}  // namespace dflsim

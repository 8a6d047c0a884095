#pragma once

#include <cstdint>
#include <vector>

namespace dflsim {

/// counts(i, j) = number of samples with true label i predicted as j.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int labels)
      : labels_(labels), counts_(static_cast<std::size_t>(labels) * labels, 0) {}

  int labels() const { return labels_; }
  std::int64_t operator()(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
  std::int64_t& operator()(int truth, int predicted) { return counts_[index(truth, predicted)]; }
  void add(int truth, int predicted) { ++counts_[index(truth, predicted)]; }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }
  std::int64_t row_sum(int truth) const {
    std::int64_t t = 0;
    for (int j = 0; j < labels_; ++j) t += (*this)(truth, j);
    return t;
  }
  std::int64_t col_sum(int predicted) const {
    std::int64_t t = 0;
    for (int i = 0; i < labels_; ++i) t += (*this)(i, predicted);
    return t;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(labels_) + static_cast<std::size_t>(j);
  }

  int labels_ = 0;
  std::vector<std::int64_t> counts_;
};

}  // namespace dflsim

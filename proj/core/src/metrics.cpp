#include "dflsim/metrics.hpp"

#include <string>

#include "dflsim/error.hpp"

namespace dflsim {

std::string_view to_string(MetricName m) {
  switch (m) {
    case MetricName::f1_benign_avg: return "f1_benign_avg";
    case MetricName::asr_targeted: return "asr_targeted";
    case MetricName::asr_backdoor: return "asr_backdoor";
  }
  return "f1_benign_avg";
}

MetricName metric_from_string(std::string_view name) {
  for (auto m : {MetricName::f1_benign_avg, MetricName::asr_targeted, MetricName::asr_backdoor}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

double macro_f1(const ConfusionMatrix& cm) {
  const int labels = cm.labels();
  if (labels == 0) throw InvalidArgument("empty confusion matrix");
  double sum = 0.0;
  for (int c = 0; c < labels; ++c) {
    const auto tp = static_cast<double>(cm(c, c));
    const auto predicted = static_cast<double>(cm.col_sum(c));
    const auto actual = static_cast<double>(cm.row_sum(c));
    if (tp == 0.0 || predicted == 0.0 || actual == 0.0) continue;
    const double precision = tp / predicted;
    const double recall = tp / actual;
    sum += 2.0 * precision * recall / (precision + recall);
  }
  return sum / labels;
}

double asr_targeted(const ConfusionMatrix& cm, int src, int tgt) {
  if (src == tgt) throw InvalidArgument("asr_targeted: source equals target");
  if (src < 0 || tgt < 0 || src >= cm.labels() || tgt >= cm.labels()) {
    throw InvalidArgument("asr_targeted: label out of range");
  }
  const auto row = cm.row_sum(src);
  if (row == 0) throw InvalidArgument("asr_targeted: no samples with the source label");
  return static_cast<double>(cm(src, tgt)) / static_cast<double>(row);
}

double asr_backdoor(const ConfusionMatrix& cm_triggered, int tgt) {
  if (tgt < 0 || tgt >= cm_triggered.labels()) throw InvalidArgument("asr_backdoor: label out of range");
  const auto hit = cm_triggered(tgt, tgt);
  const auto denom = cm_triggered.total() - hit;
  if (denom <= 0) throw InvalidArgument("asr_backdoor: degenerate denominator");
  return static_cast<double>(cm_triggered.col_sum(tgt) - hit) / static_cast<double>(denom);
}

double benign_average(const std::map<NodeId, double>& per_node, const std::set<NodeId>& benign) {
  if (benign.empty()) throw InvalidArgument("benign_average: no benign nodes");
  double s = 0.0;
  for (NodeId id : benign) {
    auto it = per_node.find(id);
    if (it == per_node.end()) throw InvalidArgument("benign_average: missing value for node " + std::to_string(id));
    s += it->second;
  }
  return s / static_cast<double>(benign.size());
}

}  // namespace dflsim

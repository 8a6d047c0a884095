#pragma once

#include <map>
#include <set>
#include <string_view>

#include "dflsim/confusion_matrix.hpp"
#include "dflsim/topology.hpp"

namespace dflsim {

enum class MetricName { f1_benign_avg, asr_targeted, asr_backdoor };

std::string_view to_string(MetricName m);
MetricName metric_from_string(std::string_view name);

/// Unweighted mean over classes of per-class F1; a class whose precision or
/// recall is undefined contributes 0.
double macro_f1(const ConfusionMatrix& cm);

/// c[src][tgt] / sum_j c[src][j]. Throws InvalidArgument on an empty source row or src == tgt.
double asr_targeted(const ConfusionMatrix& cm, int src, int tgt);

/// (sum_j c[j][tgt] - c[tgt][tgt]) / (|D| - c[tgt][tgt]) on a fully triggered test set.
double asr_backdoor(const ConfusionMatrix& cm_triggered, int tgt);

/// Mean of per_node over the benign ids.
double benign_average(const std::map<NodeId, double>& per_node, const std::set<NodeId>& benign);

}  // namespace dflsim

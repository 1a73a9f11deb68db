#include "mutadetect/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mutadetect/error.hpp"
#include "mutadetect/log.hpp"

namespace mutadetect {

namespace {

void check_scored(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty()) throw ContractError("metrics on an empty score list");
  if (scores.size() != labels.size())
    throw ContractError("metrics: " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(labels.size()) + " labels");
  for (int y : labels)
    if (y != 0 && y != 1)
      throw ContractError("metrics: label " + std::to_string(y) + " outside {0,1}");
}

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

Confusion count_confusion(const std::vector<double>& scores,
                          const std::vector<int>& labels, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool actual_pos = labels[i] == 0;  // mutated
    const bool pred_pos = scores[i] > threshold;
    if (actual_pos && pred_pos) ++c.tp;
    else if (!actual_pos && pred_pos) ++c.fp;
    else if (actual_pos && !pred_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  check_scored(scores, labels);
  std::size_t pos = 0, neg = 0;
  for (int y : labels) (y == 0 ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw DataError("roc_auc is undefined with a single class (" + std::to_string(pos) +
                    " mutated, " + std::to_string(neg) + " normal)");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double value = scores[order[i]];
    curve.points.push_back({value, static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
    // consume the whole tie group at once
    while (i < order.size() && scores[order[i]] == value) {
      (labels[order[i]] == 0 ? tp : fp)++;
      ++i;
    }
  }
  const double min_score = scores[order.back()];
  curve.points.push_back({min_score - 1.0, 1.0, 1.0});

  for (std::size_t p = 0; p + 1 < curve.points.size(); ++p) {
    const auto& a = curve.points[p];
    const auto& b = curve.points[p + 1];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

MetricsReport classify_report(const std::vector<double>& scores,
                              const std::vector<int>& labels, double threshold) {
  check_scored(scores, labels);
  const Confusion c = count_confusion(scores, labels, threshold);
  MetricsReport r;
  r.threshold = threshold;
  r.tp = c.tp;
  r.fp = c.fp;
  r.tn = c.tn;
  r.fn = c.fn;
  if (c.tp + c.fp == 0) {
    log_warn("no samples predicted mutated at threshold " + std::to_string(threshold) +
             "; precision reported as 0");
    r.precision = 0.0;
  } else {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  r.recall = c.tp + c.fn == 0 ? 0.0
                              : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
  const Confusion c = count_confusion(scores, labels, threshold);
  const double precision =
      c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall =
      c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

}  // namespace mutadetect

#pragma once

#include <cstddef>
#include <vector>

namespace mutadetect {

// Metrics treat "mutated" (label 0) as the positive class and the rule
// "score > threshold => predicted mutated" throughout, so reports read in
// terms of mutation detection.

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold descending: (0,0) ... (1,1)
  double auc = 0.0;
};

// Threshold sweep over the distinct scores, ties processed together, AUC by
// trapezoids (equals the Mann-Whitney statistic with half weight on ties).
// Needs both classes present.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct MetricsReport {
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion counts and P/R/F1 at the given threshold. Precision is 0 when
// nothing is predicted positive (logged); F1 is 0 when both P and R are 0.
// auc is left at 0 unless the caller fills it from roc_auc.
MetricsReport classify_report(const std::vector<double>& scores,
                              const std::vector<int>& labels, double threshold);

// F1 alone, for threshold search loops.
double f1_at_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold);

}  // namespace mutadetect

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mutadetect/error.hpp"
#include "mutadetect/metrics.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/trainer.hpp"

using namespace mutadetect;

namespace {

// Pairwise Mann-Whitney: P(anomaly scores above normal) with ties at half.
double mann_whitney(const std::vector<double>& scores, const std::vector<int>& labels) {
  double hits = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0) continue;  // positives are the mutated (label 0)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 1) continue;
      ++pairs;
      if (scores[i] > scores[j]) hits += 1.0;
      else if (scores[i] == scores[j]) hits += 0.5;
    }
  }
  return hits / static_cast<double>(pairs);
}

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

Instance random_instance(std::mt19937_64& rng, std::size_t max_n, bool force_ties) {
  Instance inst;
  const std::size_t n = 2 + uniform_index(rng, max_n - 2);
  inst.scores.resize(n);
  inst.labels.resize(n);
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < n; ++i) {
    // a small integer grid forces plenty of tied scores
    inst.scores[i] = force_ties ? static_cast<double>(uniform_index(rng, 6))
                                : uniform_real(rng, 0.0, 1.0);
    inst.labels[i] = uniform_index(rng, 2) ? 1 : 0;
    (inst.labels[i] ? has1 : has0) = true;
  }
  if (!has0) inst.labels[0] = 0;
  if (!has1) inst.labels.back() = 1;
  return inst;
}

}  // namespace

TEST_CASE("auc equals the pairwise statistic, ties included") {
  auto rng = substream(70, "auc");
  for (int t = 0; t < 60; ++t) {
    Instance inst = random_instance(rng, 200, t % 2 == 0);
    const double auc = roc_auc(inst.scores, inst.labels).auc;
    const double mw = mann_whitney(inst.scores, inst.labels);
    CHECK(std::abs(auc - mw) < 1e-9);
  }
}

TEST_CASE("roc curve runs from (0,0) to (1,1) monotonically") {
  auto rng = substream(71, "curve");
  Instance inst = random_instance(rng, 50, true);
  RocCurve curve = roc_auc(inst.scores, inst.labels);
  REQUIRE(curve.points.size() >= 2);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
    CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    CHECK(curve.points[i].threshold <= curve.points[i - 1].threshold);
  }
}

TEST_CASE("auc pinned cases") {
  // perfectly separated: every mutated sample scores above every normal one
  CHECK(roc_auc({5.0, 4.0, 1.0, 0.5}, {0, 0, 1, 1}).auc == doctest::Approx(1.0));
  // inverted
  CHECK(roc_auc({0.5, 1.0, 4.0, 5.0}, {0, 0, 1, 1}).auc == doctest::Approx(0.0));
  // all scores identical: only ties, so chance level
  CHECK(roc_auc({2.0, 2.0, 2.0, 2.0}, {0, 1, 0, 1}).auc == doctest::Approx(0.5));
}

TEST_CASE("single-class input is rejected") {
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {1, 1}), DataError);
  CHECK_THROWS_AS(roc_auc({1.0, 2.0}, {0, 0}), DataError);
  // an empty list is caller misuse, not bad data
  CHECK_THROWS_AS(roc_auc({}, {}), ContractError);
}

TEST_CASE("classify_report counts the confusion matrix by hand") {
  // scores: 3,2,1,0 with labels (mutated=0): 0,1,0,1 and threshold 1.5
  std::vector<double> scores{3.0, 2.0, 1.0, 0.0};
  std::vector<int> labels{0, 1, 0, 1};
  MetricsReport rep = classify_report(scores, labels, 1.5);
  CHECK(rep.tp == 1);  // score 3 mutated, predicted mutated
  CHECK(rep.fp == 1);  // score 2 normal, predicted mutated
  CHECK(rep.fn == 1);  // score 1 mutated, predicted normal
  CHECK(rep.tn == 1);
  CHECK(rep.precision == doctest::Approx(0.5));
  CHECK(rep.recall == doctest::Approx(0.5));
  CHECK(rep.f1 == doctest::Approx(0.5));
  CHECK(rep.threshold == 1.5);
}

TEST_CASE("classify_report handles empty predictions without dividing by zero") {
  MetricsReport rep = classify_report({1.0, 2.0}, {0, 1}, 10.0);
  CHECK(rep.tp == 0);
  CHECK(rep.fp == 0);
  CHECK(rep.precision == 0.0);
  CHECK(rep.recall == 0.0);
  CHECK(rep.f1 == 0.0);
}

TEST_CASE("f1_at_threshold agrees with classify_report") {
  auto rng = substream(72, "f1");
  for (int t = 0; t < 20; ++t) {
    Instance inst = random_instance(rng, 40, true);
    const double tau = uniform_real(rng, -1.0, 6.0);
    CHECK(f1_at_threshold(inst.scores, inst.labels, tau) ==
          doctest::Approx(classify_report(inst.scores, inst.labels, tau).f1));
  }
}

TEST_CASE("select_threshold achieves the exhaustive-search optimum") {
  auto rng = substream(73, "thr");
  for (int t = 0; t < 100; ++t) {
    Instance inst = random_instance(rng, 60, true);
    const double tau = select_threshold(inst.scores, inst.labels);
    const double achieved = f1_at_threshold(inst.scores, inst.labels, tau);

    // exhaustive: every distinct score as a strict cut, plus the extremes
    std::vector<double> cands = inst.scores;
    std::sort(cands.begin(), cands.end());
    cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    double best = 0.0;
    const double lo = cands.front() - 1.0, hi = cands.back() + 1.0;
    best = std::max(best, f1_at_threshold(inst.scores, inst.labels, lo));
    best = std::max(best, f1_at_threshold(inst.scores, inst.labels, hi));
    for (double c : cands) best = std::max(best, f1_at_threshold(inst.scores, inst.labels, c));
    for (std::size_t i = 0; i + 1 < cands.size(); ++i)
      best = std::max(best,
                      f1_at_threshold(inst.scores, inst.labels, (cands[i] + cands[i + 1]) / 2));

    CHECK(achieved == best);  // exact, not approximate
  }
}

TEST_CASE("select_threshold falls back on single-class validation") {
  // only normals: threshold sits at the top normal score so nothing flags
  const double tau = select_threshold({1.0, 3.0, 2.0}, {1, 1, 1});
  CHECK(tau == 3.0);
  CHECK(f1_at_threshold({1.0, 3.0, 2.0}, {1, 1, 1}, tau) == 0.0);

  // only mutated: threshold sits below every score so everything flags
  const double tau2 = select_threshold({1.0, 3.0, 2.0}, {0, 0, 0});
  CHECK(tau2 < 1.0);
}

TEST_CASE("select_threshold picks the cut that flags exactly the mutated block") {
  std::vector<double> s{1.0, 2.0, 3.0};
  std::vector<int> l{1, 0, 0};
  const double tau = select_threshold(s, l);
  // flagging {2,3} gives f1 = 1, reached at the midpoint candidate 1.5
  CHECK(tau == doctest::Approx(1.5));
  CHECK(f1_at_threshold(s, l, tau) == doctest::Approx(1.0));
}

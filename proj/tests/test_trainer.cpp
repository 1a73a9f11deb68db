#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "mutadetect/checkpoint.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/trainer.hpp"

using namespace mutadetect;

namespace {

// Normals cluster near the origin, anomalies sit far along a fixed
// direction, so a tiny model separates them within a few epochs.
SiteSample make_sample(int label, std::size_t T, std::size_t dim,
                       std::mt19937_64& rng) {
  SiteSample s;
  s.label = label;
  s.inputs.assign(T, std::vector<double>(dim));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < dim; ++j) {
      const double base = label == 1 ? 0.0 : 4.0;
      s.inputs[t][j] = base + uniform_real(rng, -0.5, 0.5);
    }
  return s;
}

std::vector<SiteSample> make_set(std::size_t n, std::size_t T, std::size_t dim,
                                 double anomaly_rate, std::mt19937_64& rng) {
  std::vector<SiteSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = uniform_unit(rng) < anomaly_rate ? 0 : 1;
    out.push_back(make_sample(label, T, dim, rng));
  }
  return out;
}

TrainConfig tiny_config() {
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.lr = 0.05;
  cfg.epochs = 12;
  cfg.trials = 2;
  cfg.seed = 5;
  cfg.model.hidden = 8;
  cfg.model.attention_dim = 4;
  cfg.model.out_dim = 4;
  cfg.model.dropout = 0.1;
  return cfg;
}

}  // namespace

TEST_CASE("fit learns a separable toy set and freezes a threshold") {
  auto rng = substream(80, "fit");
  auto train = make_set(64, 3, 4, 0.25, rng);
  auto val = make_set(24, 3, 4, 0.25, rng);
  TrainConfig cfg = tiny_config();

  TrialResult res = fit(train, val, cfg, 99);
  REQUIRE(res.curve.size() == cfg.epochs);
  CHECK(res.curve.front().train_loss > res.curve.back().train_loss);
  CHECK(res.curve.back().val_f1 == doctest::Approx(1.0));
  CHECK(res.checkpoint.has_threshold);

  auto scores = score_samples(val, res.checkpoint.params, res.checkpoint.loss);
  const double f1 = f1_at_threshold(scores, sample_labels(val), res.checkpoint.threshold);
  CHECK(f1 == doctest::Approx(res.curve.back().val_f1));
}

TEST_CASE("fit requires both splits non-empty and uniform shapes") {
  auto rng = substream(81, "fit-err");
  auto train = make_set(8, 3, 4, 0.5, rng);
  auto val = make_set(4, 3, 4, 0.5, rng);
  TrainConfig cfg = tiny_config();
  CHECK_THROWS_AS(fit({}, val, cfg, 1), ContractError);
  CHECK_THROWS_AS(fit(train, {}, cfg, 1), ContractError);

  // ragged windows come from sample files, so they count as bad data
  auto ragged = train;
  ragged.back().inputs.pop_back();
  CHECK_THROWS_AS(fit(ragged, val, cfg, 1), DataError);
}

TEST_CASE("score_samples is deterministic in eval mode") {
  auto rng = substream(82, "score");
  auto data = make_set(10, 3, 4, 0.5, rng);
  ModelHyper hyper = tiny_config().model;
  hyper.input_dim = 4;
  ModelParams params = init_params(hyper, 7);
  LossConfig loss;
  auto s1 = score_samples(data, params, loss, 4);
  auto s2 = score_samples(data, params, loss, 64);  // batching must not matter
  REQUIRE(s1.size() == s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i)
    CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
}

TEST_CASE("deepsad center is frozen from the initial normal projections") {
  auto rng = substream(83, "center");
  auto train = make_set(32, 3, 4, 0.25, rng);
  auto val = make_set(16, 3, 4, 0.25, rng);
  TrainConfig cfg = tiny_config();
  cfg.loss.mode = LossMode::deepsad;
  cfg.loss.lambda = 1e-4;
  TrialResult res = fit(train, val, cfg, 3);
  REQUIRE(res.checkpoint.loss.center.size() == cfg.model.out_dim);
  // center is not the origin (the untrained projections are biased)
  double norm = 0.0;
  for (double c : res.checkpoint.loss.center) norm += c * c;
  CHECK(norm > 0.0);
}

TEST_CASE("run_trials fills per-trial metrics and honest aggregates") {
  auto rng = substream(84, "trials");
  DatasetSplits splits;
  splits.train = make_set(48, 3, 4, 0.25, rng);
  splits.val = make_set(16, 3, 4, 0.25, rng);
  splits.test = make_set(32, 3, 4, 0.25, rng);
  TrainConfig cfg = tiny_config();

  TrialsOutput out = run_trials(splits, cfg);
  REQUIRE(out.trials.size() == cfg.trials);
  double mean = 0.0;
  for (const auto& t : out.trials) mean += t.test.f1;
  mean /= static_cast<double>(out.trials.size());
  CHECK(out.f1.mean == doctest::Approx(mean).epsilon(1e-12));

  double ss = 0.0;
  for (const auto& t : out.trials) ss += (t.test.f1 - mean) * (t.test.f1 - mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.trials.size() - 1));
  CHECK(out.f1.stddev == doctest::Approx(sd).epsilon(1e-12));
  CHECK(out.f1.mean > 0.9);  // separable toy set
  CHECK(out.auc.mean > 0.95);
}

TEST_CASE("run_trials is reproducible and trial seeds differ") {
  auto rng = substream(85, "repro");
  DatasetSplits splits;
  splits.train = make_set(32, 3, 4, 0.25, rng);
  splits.val = make_set(12, 3, 4, 0.25, rng);
  splits.test = make_set(12, 3, 4, 0.25, rng);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 4;

  TrialsOutput a = run_trials(splits, cfg);
  TrialsOutput b = run_trials(splits, cfg);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i)
    CHECK(checkpoint_bytes(a.trials[i].checkpoint) ==
          checkpoint_bytes(b.trials[i].checkpoint));
  CHECK(checkpoint_bytes(a.trials[0].checkpoint) !=
        checkpoint_bytes(a.trials[1].checkpoint));
}

TEST_CASE("trial parallelism does not change the results") {
  auto rng = substream(86, "threads");
  DatasetSplits splits;
  splits.train = make_set(24, 3, 4, 0.25, rng);
  splits.val = make_set(12, 3, 4, 0.25, rng);
  splits.test = make_set(12, 3, 4, 0.25, rng);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 3;

  setenv("MUTADETECT_THREADS", "1", 1);
  TrialsOutput seq = run_trials(splits, cfg);
  setenv("MUTADETECT_THREADS", "4", 1);
  TrialsOutput par = run_trials(splits, cfg);
  unsetenv("MUTADETECT_THREADS");

  REQUIRE(seq.trials.size() == par.trials.size());
  for (std::size_t i = 0; i < seq.trials.size(); ++i) {
    CHECK(checkpoint_bytes(seq.trials[i].checkpoint) ==
          checkpoint_bytes(par.trials[i].checkpoint));
    CHECK(seq.trials[i].test.f1 == par.trials[i].test.f1);
  }
}

TEST_CASE("select_threshold warning paths still yield usable thresholds") {
  // all-normal validation: nothing should be flagged at the fallback
  const double tau = select_threshold({0.3, 0.1, 0.2}, {1, 1, 1});
  CHECK(f1_at_threshold({0.3, 0.1, 0.2}, {1, 1, 1}, tau) == 0.0);
}

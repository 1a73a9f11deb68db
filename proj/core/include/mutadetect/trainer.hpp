#pragma once

#include <cstdint>
#include <vector>

#include "mutadetect/checkpoint.hpp"
#include "mutadetect/loss.hpp"
#include "mutadetect/metrics.hpp"
#include "mutadetect/model.hpp"
#include "mutadetect/splits.hpp"

namespace mutadetect {

struct TrainConfig {
  std::size_t batch_size = 256;
  double lr = 0.001;
  std::size_t epochs = 50;
  std::size_t trials = 5;
  std::uint64_t seed = 0;
  ModelHyper model;  // input_dim is overwritten from the samples
  LossConfig loss;
};

struct EpochStat {
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrialResult {
  std::size_t trial = 0;
  Checkpoint checkpoint;
  std::vector<EpochStat> curve;
  MetricsReport test;  // filled by run_trials; empty when fit is called directly
};

// Highest-F1 threshold for "score > tau => mutated" over the candidate set
// {midpoints of consecutive distinct sorted scores} plus {min-1, max+1};
// F1 ties resolve to the larger tau. Single-class validation falls back to a
// boundary threshold with a warning.
double select_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

// One training run: per-epoch shuffle from the trial's sub-stream, batches of
// at most batch_size, encode -> project -> loss -> backward -> SGD step. In
// deepsad mode the center is fixed up front as the mean projection of the
// normal training samples under the initial weights. Each epoch records the
// mean train loss and the validation F1 at that epoch's best threshold; the
// final epoch's threshold is frozen into the checkpoint.
TrialResult fit(const std::vector<SiteSample>& train, const std::vector<SiteSample>& val,
                const TrainConfig& cfg, std::uint64_t trial_seed);

// Anomaly scores for samples under frozen parameters (eval mode, batched).
std::vector<double> score_samples(const std::vector<SiteSample>& samples,
                                  const ModelParams& params, const LossConfig& loss,
                                  std::size_t batch_size = 256);

std::vector<int> sample_labels(const std::vector<SiteSample>& samples);

struct MetricAggregate {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single trial
};

struct TrialsOutput {
  std::vector<TrialResult> trials;
  MetricAggregate auc, f1, precision, recall;
};

// trials independent fits seeded seed+trial_index, each evaluated on the test
// split at its frozen threshold. MUTADETECT_THREADS (default 1) caps how many
// trials run concurrently; any value yields the sequential results.
TrialsOutput run_trials(const DatasetSplits& splits, const TrainConfig& cfg);

}  // namespace mutadetect

#pragma once

#include <vector>

#include "mutadetect/tape.hpp"
#include "mutadetect/tensor.hpp"

namespace mutadetect {

enum class LossMode { hsc, deepsad };

// Label convention everywhere: 1 = normal (unmutated), 0 = mutated (the
// anomaly, and the positive class of the metrics).
struct LossConfig {
  LossMode mode = LossMode::hsc;
  std::vector<double> center;  // hypersphere center c, deepsad only
  double eta = 1.0;            // extra weight on labeled anomalies (deepsad)
  double lambda = 1e-6;        // weight decay coefficient (deepsad)
  double epsilon = 1e-6;       // clamp for the singular terms
};

// mean over the batch of ||phi - c||^2 for normals plus eta *
// (||phi - c||^2)^-1 for anomalies (clamped below by epsilon), plus
// (lambda/2) * sum of squared Frobenius norms of the trainable tensors.
Tensor deepsad_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                    const std::vector<Tensor>& params, const LossConfig& cfg);

// mean over the batch of y*||phi||^2 - (1-y)*log(1 - exp(-(sqrt(||phi||^2+1)-1))),
// the log argument clamped to at least epsilon (it vanishes at phi = 0).
Tensor hsc_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                const LossConfig& cfg);

// Dispatch on cfg.mode.
Tensor training_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                     const std::vector<Tensor>& params, const LossConfig& cfg);

// Higher = more anomalous: ||phi - c||^2 in deepsad mode, ||phi||^2 in hsc.
double anomaly_score(const std::vector<double>& output, const LossConfig& cfg);

// Per-row anomaly scores for a (B, out_dim) batch of projections.
std::vector<double> anomaly_scores(const Tensor& outputs, const LossConfig& cfg);

}  // namespace mutadetect

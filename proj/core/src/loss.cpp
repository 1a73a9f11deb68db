#include "mutadetect/loss.hpp"

#include <string>

#include "mutadetect/error.hpp"

namespace mutadetect {

namespace {

void check_batch(const Tensor& outputs, const std::vector<int>& labels,
                 const LossConfig& cfg) {
  if (!outputs.defined() || outputs.rows() == 0)
    throw ContractError("loss on an empty batch");
  if (labels.size() != outputs.rows())
    throw ContractError("loss: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(outputs.rows()) + " outputs");
  for (int y : labels)
    if (y != 0 && y != 1)
      throw ContractError("loss: label " + std::to_string(y) + " outside {0,1}");
  if (cfg.epsilon <= 0.0 || cfg.epsilon > 1e-2)
    throw ConfigError("loss epsilon must lie in (0, 1e-2]");
}

// Constant 0/1 column picking the rows with the wanted label.
Tensor label_mask(const std::vector<int>& labels, int wanted) {
  std::vector<double> m(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == wanted ? 1.0 : 0.0;
  return Tensor::from({labels.size(), 1}, std::move(m));
}

}  // namespace

Tensor deepsad_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                    const std::vector<Tensor>& params, const LossConfig& cfg) {
  check_batch(outputs, labels, cfg);
  if (cfg.eta <= 0.0) throw ConfigError("deepsad eta must be positive");
  if (cfg.lambda < 0.0) throw ConfigError("deepsad lambda must be non-negative");
  if (cfg.center.size() != outputs.cols())
    throw ConfigError("deepsad mode requires a center of dimension " +
                      std::to_string(outputs.cols()) +
                      (cfg.center.empty() ? " (none set)"
                                          : ", got " + std::to_string(cfg.center.size())));

  std::vector<double> neg_c(cfg.center.size());
  for (std::size_t i = 0; i < neg_c.size(); ++i) neg_c[i] = -cfg.center[i];
  Tensor diff = tape.add(outputs, Tensor::row(std::move(neg_c)));
  Tensor d2 = tape.row_sq_norm(diff);

  const double inv_batch = 1.0 / static_cast<double>(labels.size());
  Tensor normal_sum = tape.sum(tape.mul(d2, label_mask(labels, 1)));
  Tensor inv = tape.reciprocal(tape.clamp_min(d2, cfg.epsilon));
  Tensor abnormal_sum = tape.sum(tape.mul(inv, label_mask(labels, 0)));
  Tensor loss = tape.add(tape.mul_scalar(normal_sum, inv_batch),
                         tape.mul_scalar(abnormal_sum, cfg.eta * inv_batch));

  if (cfg.lambda > 0.0) {
    if (params.empty()) throw ContractError("deepsad with lambda > 0 needs parameters");
    Tensor decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor n = tape.sq_norm(params[i]);
      decay = i == 0 ? n : tape.add(decay, n);
    }
    loss = tape.add(loss, tape.mul_scalar(decay, cfg.lambda / 2.0));
  }
  return loss;
}

Tensor hsc_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                const LossConfig& cfg) {
  check_batch(outputs, labels, cfg);

  Tensor n2 = tape.row_sq_norm(outputs);
  Tensor normal_part = tape.mul(n2, label_mask(labels, 1));

  // -(1-y) log(1 - exp(-(sqrt(||phi||^2 + 1) - 1)))
  Tensor r = tape.sqrt(tape.add_scalar(n2, 1.0));
  Tensor decayed = tape.exp(tape.mul_scalar(tape.add_scalar(r, -1.0), -1.0));
  Tensor arg = tape.clamp_min(tape.add_scalar(tape.mul_scalar(decayed, -1.0), 1.0),
                              cfg.epsilon);
  Tensor abnormal_part = tape.mul(tape.log(arg), label_mask(labels, 0));

  Tensor combined = tape.add(normal_part, tape.mul_scalar(abnormal_part, -1.0));
  return tape.mul_scalar(tape.sum(combined), 1.0 / static_cast<double>(labels.size()));
}

Tensor training_loss(Tape& tape, const Tensor& outputs, const std::vector<int>& labels,
                     const std::vector<Tensor>& params, const LossConfig& cfg) {
  if (cfg.mode == LossMode::deepsad)
    return deepsad_loss(tape, outputs, labels, params, cfg);
  return hsc_loss(tape, outputs, labels, cfg);
}

double anomaly_score(const std::vector<double>& output, const LossConfig& cfg) {
  double s = 0.0;
  if (cfg.mode == LossMode::deepsad) {
    if (cfg.center.size() != output.size())
      throw ConfigError("anomaly_score: center dimension " +
                        std::to_string(cfg.center.size()) + " does not match output " +
                        std::to_string(output.size()));
    for (std::size_t i = 0; i < output.size(); ++i) {
      const double d = output[i] - cfg.center[i];
      s += d * d;
    }
  } else {
    for (double x : output) s += x * x;
  }
  return s;
}

std::vector<double> anomaly_scores(const Tensor& outputs, const LossConfig& cfg) {
  std::vector<double> scores(outputs.rows());
  std::vector<double> row(outputs.cols());
  for (std::size_t r = 0; r < outputs.rows(); ++r) {
    for (std::size_t c = 0; c < outputs.cols(); ++c) row[c] = outputs.at(r, c);
    scores[r] = anomaly_score(row, cfg);
  }
  return scores;
}

}  // namespace mutadetect

#include "mutadetect/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "mutadetect/error.hpp"
#include "mutadetect/log.hpp"
#include "mutadetect/optimizer.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

void check_uniform(const std::vector<SiteSample>& samples, const char* which,
                   std::size_t& T, std::size_t& dim) {
  if (samples.empty())
    throw ContractError(std::string("fit: empty ") + which + " set");
  for (const auto& s : samples) {
    const std::size_t t = s.inputs.size();
    const std::size_t d = t == 0 ? 0 : s.inputs[0].size();
    for (const auto& in : s.inputs)
      if (in.size() != d)
        throw DataError(std::string(which) + " sample has mixed embedding dimensions");
    if (T == 0) {
      T = t;
      dim = d;
    } else if (t != T || d != dim) {
      throw DataError(std::string(which) + " samples disagree on window length or "
                      "embedding dimension (" + std::to_string(t) + "x" +
                      std::to_string(d) + " vs " + std::to_string(T) + "x" +
                      std::to_string(dim) + ")");
    }
  }
}

// T tensors of shape (count, dim) for samples[idx[lo..lo+count)].
std::vector<Tensor> pack_inputs(const std::vector<SiteSample>& samples,
                                const std::vector<std::size_t>& idx, std::size_t lo,
                                std::size_t count, std::size_t T, std::size_t dim) {
  std::vector<Tensor> xs(T);
  for (std::size_t t = 0; t < T; ++t) {
    Tensor x = Tensor::zeros({count, dim});
    for (std::size_t b = 0; b < count; ++b) {
      const auto& src = samples[idx[lo + b]].inputs[t];
      std::copy(src.begin(), src.end(), x.data() + b * dim);
    }
    xs[t] = x;
  }
  return xs;
}

std::vector<std::size_t> identity_index(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

double max_abs_grad(std::vector<Tensor> params) {
  double mx = 0.0;
  for (Tensor& p : params) {
    if (!p.has_grad()) continue;
    for (double g : p.grad_view()) mx = std::max(mx, std::abs(g));
  }
  return mx;
}

// Center of the deepsad hypersphere: mean projection of the normal training
// samples under the initial weights, with near-zero coordinates pushed out to
// +/-0.1 so the network cannot collapse onto the center along them.
std::vector<double> deepsad_center(const std::vector<SiteSample>& train,
                                   const ModelParams& params, std::size_t batch_size) {
  std::vector<SiteSample> normals;
  for (const auto& s : train)
    if (s.label == 1) normals.push_back(s);
  if (normals.empty())
    throw DataError("deepsad center needs at least one normal training sample");

  std::vector<double> c(params.hyper.out_dim, 0.0);
  const auto idx = identity_index(normals.size());
  std::size_t done = 0;
  std::size_t T = 0, dim = 0;
  check_uniform(normals, "train", T, dim);
  while (done < normals.size()) {
    const std::size_t count = std::min(batch_size, normals.size() - done);
    Tape tape;
    auto xs = pack_inputs(normals, idx, done, count, T, dim);
    Tensor phi = project(tape, encode_any(tape, xs, params), params);
    for (std::size_t r = 0; r < count; ++r)
      for (std::size_t j = 0; j < c.size(); ++j) c[j] += phi.at(r, j);
    done += count;
  }
  for (double& x : c) {
    x /= static_cast<double>(normals.size());
    if (std::abs(x) < 0.01) x = x >= 0.0 ? 0.1 : -0.1;
  }
  return c;
}

std::size_t worker_cap() {
  const char* env = std::getenv("MUTADETECT_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) {
    log_warn(std::string("ignoring MUTADETECT_THREADS='") + env + "'");
    return 1;
  }
  return static_cast<std::size_t>(v);
}

MetricAggregate aggregate_metric(const std::vector<TrialResult>& trials,
                                 double MetricsReport::*field) {
  MetricAggregate a;
  for (const auto& t : trials) a.mean += t.test.*field;
  a.mean /= static_cast<double>(trials.size());
  if (trials.size() > 1) {
    double ss = 0.0;
    for (const auto& t : trials) {
      const double d = t.test.*field - a.mean;
      ss += d * d;
    }
    a.stddev = std::sqrt(ss / static_cast<double>(trials.size() - 1));
  }
  return a;
}

}  // namespace

double select_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.empty()) throw ContractError("select_threshold on empty scores");
  if (scores.size() != labels.size())
    throw ContractError("select_threshold: score/label count mismatch");

  bool any_pos = false, any_neg = false;
  for (int y : labels) (y == 0 ? any_pos : any_neg) = true;
  if (!any_pos || !any_neg) {
    double fallback;
    if (any_neg) {
      fallback = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < scores.size(); ++i)
        if (labels[i] == 1) fallback = std::max(fallback, scores[i]);
      log_warn("validation has no mutated samples; threshold set to the top normal score");
    } else {
      fallback = *std::min_element(scores.begin(), scores.end()) - 1.0;
      log_warn("validation has no normal samples; threshold set below the lowest score");
    }
    return fallback;
  }

  std::vector<double> distinct(scores);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<double> candidates;
  candidates.reserve(distinct.size() + 1);
  candidates.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
    candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
  candidates.push_back(distinct.back() + 1.0);

  double best_tau = candidates.front();
  double best_f1 = -1.0;
  for (double tau : candidates) {
    const double f1 = f1_at_threshold(scores, labels, tau);
    if (f1 > best_f1 || (f1 == best_f1 && tau > best_tau)) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

std::vector<double> score_samples(const std::vector<SiteSample>& samples,
                                  const ModelParams& params, const LossConfig& loss,
                                  std::size_t batch_size) {
  std::size_t T = 0, dim = 0;
  check_uniform(samples, "scoring", T, dim);
  if (batch_size == 0) throw ContractError("score_samples: batch_size must be positive");

  const auto idx = identity_index(samples.size());
  std::vector<double> scores;
  scores.reserve(samples.size());
  std::size_t done = 0;
  while (done < samples.size()) {
    const std::size_t count = std::min(batch_size, samples.size() - done);
    Tape tape;
    auto xs = pack_inputs(samples, idx, done, count, T, dim);
    Tensor phi = project(tape, encode_any(tape, xs, params), params);
    for (double s : anomaly_scores(phi, loss)) scores.push_back(s);
    done += count;
  }
  return scores;
}

std::vector<int> sample_labels(const std::vector<SiteSample>& samples) {
  std::vector<int> labels(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
  return labels;
}

TrialResult fit(const std::vector<SiteSample>& train, const std::vector<SiteSample>& val,
                const TrainConfig& cfg, std::uint64_t trial_seed) {
  if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (cfg.epochs == 0) throw ConfigError("epochs must be positive");
  if (cfg.lr < 0.0) throw ConfigError("learning rate must be non-negative");

  std::size_t T = 0, dim = 0;
  check_uniform(train, "train", T, dim);
  check_uniform(val, "validation", T, dim);

  ModelHyper hyper = cfg.model;
  hyper.input_dim = dim;
  ModelParams params = init_params(hyper, trial_seed);
  auto trainable = params.trainable();

  LossConfig loss = cfg.loss;
  if (loss.mode == LossMode::deepsad)
    loss.center = deepsad_center(train, params, cfg.batch_size);

  const auto val_labels = sample_labels(val);
  std::vector<std::size_t> order = identity_index(train.size());
  std::vector<int> batch_labels;

  TrialResult result;
  result.curve.reserve(cfg.epochs);
  double threshold = 0.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto shuffle_rng = substream(trial_seed, "epoch-shuffle", {epoch});
    shuffle_in_place(order, shuffle_rng);
    auto dropout_rng = substream(trial_seed, "dropout", {epoch});

    double loss_sum = 0.0;
    std::size_t done = 0;
    std::size_t batch_index = 0;
    while (done < train.size()) {
      const std::size_t count = std::min(cfg.batch_size, train.size() - done);
      batch_labels.resize(count);
      for (std::size_t b = 0; b < count; ++b)
        batch_labels[b] = train[order[done + b]].label;
      try {
        Tape tape;
        auto xs = pack_inputs(train, order, done, count, T, dim);
        Tensor hhat = encode_any(tape, xs, params, true, &dropout_rng);
        Tensor phi = project(tape, hhat, params);
        Tensor batch_loss = training_loss(tape, phi, batch_labels, trainable, loss);
        loss_sum += batch_loss.item() * static_cast<double>(count);
        tape.backward(batch_loss);
        sgd_step(trainable, cfg.lr);
      } catch (const NumericError& e) {
        throw NumericError("training aborted at epoch " + std::to_string(epoch + 1) +
                           ", batch " + std::to_string(batch_index + 1) + ": " + e.what() +
                           " (max |grad| = " + std::to_string(max_abs_grad(trainable)) + ")");
      }
      done += count;
      ++batch_index;
    }

    const auto val_scores = score_samples(val, params, loss, cfg.batch_size);
    threshold = select_threshold(val_scores, val_labels);
    EpochStat stat;
    stat.train_loss = loss_sum / static_cast<double>(train.size());
    stat.val_f1 = f1_at_threshold(val_scores, val_labels, threshold);
    result.curve.push_back(stat);
  }

  result.checkpoint.params = std::move(params);
  result.checkpoint.loss = loss;
  result.checkpoint.threshold = threshold;
  result.checkpoint.has_threshold = true;
  return result;
}

TrialsOutput run_trials(const DatasetSplits& splits, const TrainConfig& cfg) {
  if (cfg.trials == 0) throw ConfigError("trials must be at least 1");
  if (splits.test.empty()) throw ContractError("run_trials: empty test split");

  const auto test_labels = sample_labels(splits.test);
  TrialsOutput out;
  out.trials.resize(cfg.trials);
  std::vector<std::exception_ptr> failures(cfg.trials);

  auto run_one = [&](std::size_t trial) {
    try {
      TrialResult r = fit(splits.train, splits.val, cfg, cfg.seed + trial);
      r.trial = trial;
      const auto scores = score_samples(splits.test, r.checkpoint.params,
                                        r.checkpoint.loss, cfg.batch_size);
      r.test = classify_report(scores, test_labels, r.checkpoint.threshold);
      r.test.auc = roc_auc(scores, test_labels).auc;
      out.trials[trial] = std::move(r);
    } catch (const ConfigError& e) {
      failures[trial] = std::make_exception_ptr(
          ConfigError("trial " + std::to_string(trial) + ": " + e.what()));
    } catch (const DataError& e) {
      failures[trial] = std::make_exception_ptr(
          DataError("trial " + std::to_string(trial) + ": " + e.what()));
    } catch (const NumericError& e) {
      failures[trial] = std::make_exception_ptr(
          NumericError("trial " + std::to_string(trial) + ": " + e.what()));
    } catch (...) {
      failures[trial] = std::current_exception();
    }
  };

  const std::size_t workers = std::min(worker_cap(), cfg.trials);
  if (workers <= 1) {
    for (std::size_t t = 0; t < cfg.trials; ++t) run_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (std::size_t t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
          run_one(t);
      });
    for (auto& th : pool) th.join();
  }

  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  out.auc = aggregate_metric(out.trials, &MetricsReport::auc);
  out.f1 = aggregate_metric(out.trials, &MetricsReport::f1);
  out.precision = aggregate_metric(out.trials, &MetricsReport::precision);
  out.recall = aggregate_metric(out.trials, &MetricsReport::recall);
  return out;
}

}  // namespace mutadetect

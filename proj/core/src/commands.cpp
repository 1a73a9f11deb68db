#include "mutadetect/commands.hpp"

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mutadetect/chains.hpp"
#include "mutadetect/checkpoint.hpp"
#include "mutadetect/corpus.hpp"
#include "mutadetect/embedding.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/gradcheck_suite.hpp"
#include "mutadetect/io.hpp"
#include "mutadetect/kmeans.hpp"
#include "mutadetect/log.hpp"
#include "mutadetect/metrics.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/samples_io.hpp"
#include "mutadetect/trainer.hpp"

namespace mutadetect {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

TrigramTable make_table(const EmbeddingConfig& cfg, std::uint64_t seed) {
  if (!cfg.table.empty()) return TrigramTable::load(cfg.table, seed);
  if (!cfg.allow_fallback)
    throw ConfigError("no embedding table configured and fallback is disabled");
  return TrigramTable(cfg.dim, seed);
}

nlohmann::json report_json(const MetricsReport& r) {
  return {
      {"auc", r.auc},           {"f1", r.f1},
      {"precision", r.precision}, {"recall", r.recall},
      {"threshold", r.threshold},
      {"confusion",
       {{"tp", r.tp}, {"fp", r.fp}, {"tn", r.tn}, {"fn", r.fn}}},
  };
}

}  // namespace

void cmd_preprocess(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("config sets no corpus path");
  if (cfg.dataset.positions.empty())
    throw ConfigError("dataset.positions must list at least one site");
  if (cfg.dataset.T < 1) throw ConfigError("dataset.T must be at least 1");
  if (cfg.dataset.draws == 0) throw ConfigError("dataset.draws must be positive");
  if (cfg.dataset.k == 0) throw ConfigError("dataset.k must be positive");

  const TrigramTable table = make_table(cfg.embedding, cfg.seed);

  auto cohorts = parse_corpus(cfg.corpus, corpus_format_from_path(cfg.corpus));
  sanitize_cohorts(cohorts, cfg.seed);

  const std::size_t length = cohorts[0].records[0].residues.size();
  const std::size_t lo = min_embeddable_position();
  const std::size_t hi = max_embeddable_position(length);
  for (std::size_t p : cfg.dataset.positions)
    if (p < lo || p > hi)
      throw ConfigError("position " + std::to_string(p) +
                        " is outside the embeddable range [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "] for length " +
                        std::to_string(length));

  const std::size_t steps_per_window = cfg.dataset.T + 1;
  if (cohorts.size() < steps_per_window)
    throw DataError("corpus has " + std::to_string(cohorts.size()) +
                    " time steps; windows need " + std::to_string(steps_per_window));

  std::vector<CohortClustering> clusterings(cohorts.size());
  for (std::size_t i = 0; i < cohorts.size(); ++i) {
    std::vector<std::vector<double>> points;
    points.reserve(cohorts[i].records.size());
    for (const auto& rec : cohorts[i].records)
      points.push_back(record_mean_embedding(rec, table));
    auto rng = substream(cfg.seed, "kmeans-init",
                         {static_cast<std::uint64_t>(cohorts[i].time_index)});
    clusterings[i].time_index = cohorts[i].time_index;
    clusterings[i].clusters =
        cluster_cohort(points, cfg.dataset.k, rng, cfg.dataset.restarts);
  }

  std::vector<std::vector<SiteSample>> groups;
  std::vector<long long> group_windows;
  for (std::size_t w = 0; w + steps_per_window <= cohorts.size(); ++w) {
    std::vector<CohortClustering> steps(clusterings.begin() + w,
                                        clusterings.begin() + w + steps_per_window);
    std::vector<TimeCohort> window_cohorts(cohorts.begin() + w,
                                           cohorts.begin() + w + steps_per_window);
    const long long label_time = steps.back().time_index;

    std::vector<std::vector<SiteSample>> per_chain;
    for (const ClusterChain& chain : build_chains(steps))
      per_chain.push_back(sample_time_series(chain, window_cohorts,
                                             cfg.dataset.positions,
                                             cfg.dataset.draws, cfg.seed, table));

    // Interleave chains so every contiguous slice of the group mixes all of
    // them; the positional split protocol would otherwise hand whole chains
    // to single splits.
    std::vector<SiteSample> group;
    group.reserve(per_chain.size() * per_chain[0].size());
    for (std::size_t i = 0; i < per_chain[0].size(); ++i) {
      for (auto& chain_samples : per_chain) {
        chain_samples[i].window = label_time;
        group.push_back(std::move(chain_samples[i]));
      }
    }
    group_windows.push_back(label_time);
    groups.push_back(std::move(group));
  }

  std::vector<GroupCounts> counts(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const SplitCounts sc = split_counts(groups[g].size(), cfg.dataset.split);
    counts[g].window = group_windows[g];
    counts[g].total = groups[g].size();
    counts[g].train = sc.train;
    counts[g].val = sc.val;
    counts[g].test = sc.test;
  }

  DatasetSplits splits = split_dataset(std::move(groups), cfg.dataset.split);

  ensure_directory(cfg.out);
  write_samples_file(cfg.samples_path(), splits);
  write_file_atomic(cfg.out + "/manifest.json", manifest_bytes(counts));

  if (table.fallback_count() > 0 && !cfg.embedding.table.empty())
    log_info("synthesized " + std::to_string(table.fallback_count()) +
             " trigram vectors missing from the table");

  for (const GroupCounts& c : counts)
    std::printf("window %lld: total %zu  train %zu  val %zu  test %zu\n", c.window,
                c.total, c.train, c.val, c.test);
  std::printf("samples: train %zu  val %zu  test %zu -> %s\n", splits.train.size(),
              splits.val.size(), splits.test.size(), cfg.samples_path().c_str());
}

void cmd_train(const RunConfig& cfg) {
  DatasetSplits splits = read_samples_file(cfg.samples_path());
  if (splits.train.empty()) throw DataError("samples file has an empty train split");
  if (splits.val.empty()) throw DataError("samples file has an empty val split");
  if (splits.test.empty()) throw DataError("samples file has an empty test split");

  TrialsOutput out = run_trials(splits, cfg.train);

  ensure_directory(cfg.out);
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "trials";
  doc["trials"] = nlohmann::json::array();

  std::string curves = "trial,epoch,train_loss,val_f1\n";
  for (const TrialResult& t : out.trials) {
    save_checkpoint(cfg.out + "/checkpoint_trial" + std::to_string(t.trial) + ".bin",
                    t.checkpoint);
    nlohmann::json row = report_json(t.test);
    row["trial"] = t.trial;
    doc["trials"].push_back(std::move(row));
    for (std::size_t e = 0; e < t.curve.size(); ++e)
      curves += std::to_string(t.trial) + "," + std::to_string(e + 1) + "," +
                fmt_double(t.curve[e].train_loss) + "," +
                fmt_double(t.curve[e].val_f1) + "\n";
  }
  doc["aggregate"] = {
      {"auc", {{"mean", out.auc.mean}, {"stddev", out.auc.stddev}}},
      {"f1", {{"mean", out.f1.mean}, {"stddev", out.f1.stddev}}},
      {"precision", {{"mean", out.precision.mean}, {"stddev", out.precision.stddev}}},
      {"recall", {{"mean", out.recall.mean}, {"stddev", out.recall.stddev}}},
  };
  write_file_atomic(cfg.out + "/trials.json", doc.dump(2) + "\n");
  write_file_atomic(cfg.out + "/curves.csv", curves);

  for (const TrialResult& t : out.trials)
    std::printf("trial %zu: auc %.4f  f1 %.4f  precision %.4f  recall %.4f  "
                "threshold %.6g\n",
                t.trial, t.test.auc, t.test.f1, t.test.precision, t.test.recall,
                t.checkpoint.threshold);
  std::printf("mean over %zu trials: auc %.4f (sd %.4f)  f1 %.4f (sd %.4f)\n",
              out.trials.size(), out.auc.mean, out.auc.stddev, out.f1.mean,
              out.f1.stddev);
}

void cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                  const std::string& split_name,
                  std::optional<double> threshold_override) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (threshold_override) {
    ck.threshold = *threshold_override;
    ck.has_threshold = true;
  }
  if (!ck.has_threshold)
    throw DataError("checkpoint stores no threshold; run train first");

  DatasetSplits splits = read_samples_file(cfg.samples_path());
  const std::vector<SiteSample>* samples = nullptr;
  if (split_name == "train") samples = &splits.train;
  else if (split_name == "val") samples = &splits.val;
  else if (split_name == "test") samples = &splits.test;
  else
    throw ConfigError("unknown split '" + split_name +
                      "' (expected train, val, or test)");
  if (samples->empty()) throw DataError("split '" + split_name + "' is empty");

  const std::size_t dim = (*samples)[0].inputs.empty() ? 0 : (*samples)[0].inputs[0].size();
  if (dim != ck.params.hyper.input_dim)
    throw DataError("checkpoint expects embedding dimension " +
                    std::to_string(ck.params.hyper.input_dim) + ", samples carry " +
                    std::to_string(dim));

  const auto scores = score_samples(*samples, ck.params, ck.loss);
  const auto labels = sample_labels(*samples);
  MetricsReport report = classify_report(scores, labels, ck.threshold);
  const RocCurve curve = roc_auc(scores, labels);
  report.auc = curve.auc;

  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["kind"] = "report";
  doc["split"] = split_name;
  doc["samples"] = samples->size();
  doc["metrics"] = report_json(report);

  std::string roc = "threshold,fpr,tpr\n";
  for (const RocPoint& p : curve.points)
    roc += fmt_double(p.threshold) + "," + fmt_double(p.fpr) + "," +
           fmt_double(p.tpr) + "\n";

  ensure_directory(cfg.out);
  write_file_atomic(cfg.out + "/report.json", doc.dump(2) + "\n");
  write_file_atomic(cfg.out + "/roc.csv", roc);

  std::printf("%s: %zu samples  auc %.4f  f1 %.4f  precision %.4f  recall %.4f  "
              "(threshold %.6g)\n",
              split_name.c_str(), samples->size(), report.auc, report.f1,
              report.precision, report.recall, report.threshold);
}

bool cmd_gradcheck(std::uint64_t seed) {
  bool all_pass = true;
  std::printf("%-34s %-14s %-10s %s\n", "check", "max_rel_err", "tolerance", "status");
  for (const GradCheckCase& c : run_gradcheck_suite(seed)) {
    std::printf("%-34s %-14.3e %-10.0e %s\n", c.name.c_str(), c.max_rel_err,
                c.tolerance, c.pass ? "pass" : "FAIL");
    all_pass = all_pass && c.pass;
  }
  return all_pass;
}

void cmd_synth(const SynthConfig& synth, const std::string& out_dir) {
  const SynthResult res = generate_synthetic_corpus(synth);
  ensure_directory(out_dir);
  write_file_atomic(out_dir + "/corpus.csv", res.corpus_csv);
  write_file_atomic(out_dir + "/truth.json", res.truth_json);
  write_file_atomic(out_dir + "/table.tsv", res.table_tsv);
  std::printf("wrote %zu records over %zu cohorts with %zu planted mutations to %s\n",
              synth.cohorts * synth.per_cohort, synth.cohorts, res.mutations.size(),
              out_dir.c_str());
}

}  // namespace mutadetect

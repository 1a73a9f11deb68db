#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "mutadetect/commands.hpp"
#include "mutadetect/config.hpp"
#include "mutadetect/error.hpp"

namespace md = mutadetect;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::string samples;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required = true) {
  auto* opt = cmd->add_option("-c,--config", f.config_path, "run config JSON");
  if (config_required) opt->required();
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--samples", f.samples, "samples file path (overrides config)");
  cmd->add_option("--seed", f.seed, "master seed (overrides config)")
      ->each([&f](const std::string&) { f.has_seed = true; });
}

md::RunConfig resolve(const CommonFlags& f) {
  md::RunConfig cfg = md::load_run_config(f.config_path);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.samples.empty()) cfg.samples = f.samples;
  if (f.has_seed) {
    cfg.seed = f.seed;
    cfg.train.seed = f.seed;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sequence-position mutation prediction pipeline"};
  app.require_subcommand(1);

  CommonFlags pre_flags;
  std::string pre_table;
  std::uint64_t pre_dim = 0;
  auto* pre = app.add_subcommand("preprocess",
                                 "corpus -> clustered, embedded, split samples");
  add_common(pre, pre_flags);
  pre->add_option("--embedding-table", pre_table, "trigram TSV (overrides config)");
  pre->add_option("--embedding-dim", pre_dim,
                  "embedding dimension for table-free runs (overrides config)");

  CommonFlags train_flags;
  std::uint64_t train_trials = 0;
  std::string train_loss;
  auto* train = app.add_subcommand("train", "fit trials and freeze checkpoints");
  add_common(train, train_flags);
  train->add_option("--trials", train_trials, "trial count (overrides config)");
  train->add_option("--loss", train_loss, "loss mode: hsc or deepsad")
      ->check(CLI::IsMember({"hsc", "deepsad"}));

  CommonFlags eval_flags;
  std::string eval_checkpoint;
  std::string eval_split = "test";
  double eval_threshold = 0.0;
  bool eval_has_threshold = false;
  auto* eval = app.add_subcommand("evaluate", "score a split with a checkpoint");
  add_common(eval, eval_flags);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval->add_option("--split", eval_split, "train, val, or test");
  eval->add_option("--threshold", eval_threshold,
                   "override the checkpoint's stored threshold")
      ->each([&eval_has_threshold](const std::string&) { eval_has_threshold = true; });

  std::uint64_t grad_seed = 0;
  auto* grad = app.add_subcommand("gradcheck",
                                  "finite-difference checks for every primitive");
  grad->add_option("--seed", grad_seed, "seed for the random check points");

  md::SynthConfig synth_cfg;
  std::string synth_out = "synth";
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--cohorts", synth_cfg.cohorts, "number of time steps");
  synth->add_option("--size", synth_cfg.per_cohort, "sequences per time step");
  synth->add_option("--length", synth_cfg.length, "sequence length");
  synth->add_option("--lineages", synth_cfg.lineages, "independent lineages");
  synth->add_option("--rate", synth_cfg.mutation_rate,
                    "per-position per-transition mutation probability");
  synth->add_option("--start-year", synth_cfg.start_year, "first time index");
  synth->add_option("--embed-dim", synth_cfg.embed_dim,
                    "dimension of the emitted trigram table");
  synth->add_option("--seed", synth_cfg.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pre->parsed()) {
      md::RunConfig cfg = resolve(pre_flags);
      if (!pre_table.empty()) cfg.embedding.table = pre_table;
      if (pre_dim > 0) cfg.embedding.dim = pre_dim;
      md::cmd_preprocess(cfg);
    } else if (train->parsed()) {
      md::RunConfig cfg = resolve(train_flags);
      if (train_trials > 0) cfg.train.trials = train_trials;
      if (train_loss == "hsc") cfg.train.loss.mode = md::LossMode::hsc;
      if (train_loss == "deepsad") cfg.train.loss.mode = md::LossMode::deepsad;
      md::cmd_train(cfg);
    } else if (eval->parsed()) {
      md::RunConfig cfg = resolve(eval_flags);
      std::optional<double> override;
      if (eval_has_threshold) override = eval_threshold;
      md::cmd_evaluate(cfg, eval_checkpoint, eval_split, override);
    } else if (grad->parsed()) {
      if (!md::cmd_gradcheck(grad_seed)) {
        std::fprintf(stderr, "gradient check failed\n");
        return 4;
      }
    } else if (synth->parsed()) {
      md::cmd_synth(synth_cfg, synth_out);
    }
  } catch (const md::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const md::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const md::NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

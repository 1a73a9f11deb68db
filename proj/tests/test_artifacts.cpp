#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "json.hpp"

#include "mutadetect/checkpoint.hpp"
#include "mutadetect/config.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/samples_io.hpp"

using namespace mutadetect;

namespace {

Checkpoint make_checkpoint(std::uint64_t seed) {
  ModelHyper hyper;
  hyper.input_dim = 6;
  hyper.hidden = 8;
  hyper.attention_dim = 4;
  hyper.out_dim = 3;
  Checkpoint ck;
  ck.params = init_params(hyper, seed);
  ck.loss.mode = LossMode::deepsad;
  ck.loss.center = {0.125, -2.5, 3.75};
  ck.loss.eta = 2.0;
  ck.loss.lambda = 1e-4;
  ck.threshold = 0.7071067811865476;
  ck.has_threshold = true;
  return ck;
}

DatasetSplits make_splits(std::uint64_t seed) {
  auto rng = substream(seed, "splits");
  DatasetSplits s;
  auto make = [&](std::size_t n, std::vector<SiteSample>& dst) {
    for (std::size_t i = 0; i < n; ++i) {
      SiteSample x;
      x.position = 2 + uniform_index(rng, 40);
      x.label = uniform_index(rng, 2) ? 1 : 0;
      x.chain_id = uniform_index(rng, 3);
      x.draw_id = i;
      x.window = 2005 + static_cast<long long>(uniform_index(rng, 4));
      x.inputs.assign(3, std::vector<double>(4));
      for (auto& row : x.inputs)
        for (double& v : row) v = uniform_real(rng, -5.0, 5.0);
      dst.push_back(std::move(x));
    }
  };
  make(7, s.train);
  make(3, s.val);
  make(4, s.test);
  return s;
}

}  // namespace

TEST_CASE("checkpoint round-trips bit-exactly") {
  const std::string path = "test_ck.bin";
  Checkpoint ck = make_checkpoint(3);
  save_checkpoint(path, ck);
  Checkpoint back = load_checkpoint(path);

  CHECK(back.threshold == ck.threshold);
  CHECK(back.has_threshold);
  CHECK(back.loss.mode == LossMode::deepsad);
  CHECK(back.loss.center == ck.loss.center);
  CHECK(back.loss.eta == ck.loss.eta);
  CHECK(back.loss.lambda == ck.loss.lambda);
  CHECK(back.params.hyper.hidden == 8);

  auto a = ck.params.trainable();
  auto b = back.params.trainable();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].size() == b[i].size());
    for (std::size_t j = 0; j < a[i].size(); ++j) CHECK(a[i].at(j) == b[i].at(j));
  }

  // serialising the loaded checkpoint reproduces the same bytes
  CHECK(checkpoint_bytes(back) == checkpoint_bytes(ck));
  CHECK(checkpoint_bytes(back) == read_file(path));
  std::remove(path.c_str());
}

TEST_CASE("checkpoint rejects a corrupted magic") {
  const std::string path = "test_ck_bad.bin";
  Checkpoint ck = make_checkpoint(4);
  std::string bytes = checkpoint_bytes(ck);
  bytes[0] = 'x';
  write_file_atomic(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("samples file round-trips every field") {
  const std::string path = "test_samples.jsonl";
  DatasetSplits s = make_splits(9);
  write_samples_file(path, s);
  DatasetSplits back = read_samples_file(path);

  REQUIRE(back.train.size() == s.train.size());
  REQUIRE(back.val.size() == s.val.size());
  REQUIRE(back.test.size() == s.test.size());
  auto same = [](const std::vector<SiteSample>& x, const std::vector<SiteSample>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].position == y[i].position);
      CHECK(x[i].label == y[i].label);
      CHECK(x[i].chain_id == y[i].chain_id);
      CHECK(x[i].draw_id == y[i].draw_id);
      CHECK(x[i].window == y[i].window);
      CHECK(x[i].inputs == y[i].inputs);  // doubles survive verbatim
    }
  };
  same(s.train, back.train);
  same(s.val, back.val);
  same(s.test, back.test);

  // a second write produces identical bytes
  CHECK(samples_file_bytes(back) == read_file(path));
  std::remove(path.c_str());
}

TEST_CASE("manifest carries per-window counts and totals") {
  std::vector<GroupCounts> groups(2);
  groups[0] = {2005, 1000, 720, 80, 200};
  groups[1] = {2006, 10, 7, 1, 2};
  auto j = nlohmann::json::parse(manifest_bytes(groups));
  REQUIRE(j["groups"].size() == 2);
  CHECK(j["groups"][0]["window"] == 2005);
  CHECK(j["groups"][0]["train"] == 720);
  CHECK(j["groups"][1]["test"] == 2);
  CHECK(j["totals"]["train"] == 727);
  CHECK(j["totals"]["val"] == 81);
  CHECK(j["totals"]["test"] == 202);
}

TEST_CASE("config parses, round-trips, and rejects unknown keys") {
  const std::string text = R"({
    "format_version": 1,
    "seed": 11,
    "corpus": "corpus.csv",
    "out": "artifacts",
    "embedding": {"dim": 32, "allow_fallback": true},
    "dataset": {"k": 4, "draws": 12, "T": 3, "positions": [5, 9],
                "split": {"train_fraction": 0.8, "val_fraction_of_train": 0.1,
                          "per_cohort_cap": 500}},
    "train": {"batch_size": 64, "lr": 0.01, "epochs": 2, "trials": 1,
              "hidden": 16, "attention_dim": 8, "out_dim": 4, "dropout": 0.25},
    "loss": {"mode": "deepsad", "eta": 2.0, "lambda": 0.001}
  })";
  RunConfig cfg = parse_run_config(text);
  CHECK(cfg.seed == 11);
  CHECK(cfg.dataset.k == 4);
  CHECK(cfg.dataset.positions == std::vector<std::size_t>{5, 9});
  CHECK(cfg.dataset.split.per_cohort_cap == 500);
  CHECK(cfg.train.model.hidden == 16);
  CHECK(cfg.train.loss.mode == LossMode::deepsad);
  CHECK(cfg.samples_path() == "artifacts/samples.jsonl");

  // dump -> parse -> dump is a fixed point
  const std::string dumped = dump_run_config(cfg);
  RunConfig cfg2 = parse_run_config(dumped);
  CHECK(dump_run_config(cfg2) == dumped);

  CHECK_THROWS_AS(parse_run_config(R"({"format_version":1,"corpus":"x","typo":3})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"format_version":1,"dataset":{"draws":"many"},"corpus":"x"})"),
      ConfigError);
  CHECK_THROWS_AS(parse_run_config(R"({"format_version":99,"corpus":"x"})"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("not json at all"), ConfigError);
}

TEST_CASE("config validates ranges") {
  CHECK_THROWS_AS(
      parse_run_config(R"({"format_version":1,"corpus":"x","train":{"dropout":1.5}})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"format_version":1,"corpus":"x","dataset":{"T":1}})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_run_config(R"({"format_version":1,"corpus":"x","loss":{"mode":"other"}})"),
      ConfigError);
}

TEST_CASE("atomic writes replace the target completely") {
  const std::string path = "test_atomic.txt";
  write_file_atomic(path, "first version, longer than the second\n");
  write_file_atomic(path, "second\n");
  CHECK(read_file(path) == "second\n");
  std::remove(path.c_str());
}

TEST_CASE("read_file on a missing path is a data error") {
  CHECK_THROWS_AS(read_file("definitely_not_here.bin"), DataError);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mutadetect/splits.hpp"
#include "mutadetect/trainer.hpp"

namespace mutadetect {

struct EmbeddingConfig {
  std::string table;        // TSV path; empty = synthesize every trigram
  std::size_t dim = 100;    // used when no table is loaded
  bool allow_fallback = true;
};

struct DatasetConfig {
  std::size_t k = 3;
  std::size_t restarts = 8;
  std::size_t draws = 30;
  std::size_t T = 5;
  std::vector<std::size_t> positions;
  SplitSpec split;
};

// One config drives preprocess, train, and evaluate, so reruns of the whole
// pipeline share a single source of truth. Unknown keys anywhere are
// rejected; format_version must match.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string corpus;
  std::string out = "out";
  std::string samples;  // defaults to <out>/samples.jsonl
  EmbeddingConfig embedding;
  DatasetConfig dataset;
  TrainConfig train;

  std::string samples_path() const {
    return samples.empty() ? out + "/samples.jsonl" : samples;
  }
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string dump_run_config(const RunConfig& cfg);

}  // namespace mutadetect

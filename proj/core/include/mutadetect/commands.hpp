#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mutadetect/config.hpp"
#include "mutadetect/synth.hpp"

namespace mutadetect {

// The pipeline stages behind the CLI, callable in-process (the tests drive
// them directly). Each stage reads/writes the artifact files under cfg.out:
//
//   preprocess: corpus -> samples.jsonl + manifest.json
//   train:      samples.jsonl -> checkpoint_trial<N>.bin + trials.json + curves.csv
//   evaluate:   checkpoint + samples split -> report.json + roc.csv

void cmd_preprocess(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path,
                  const std::string& split_name,
                  std::optional<double> threshold_override = std::nullopt);

// Prints one line per gradient check; returns false if any failed.
bool cmd_gradcheck(std::uint64_t seed);

// Writes corpus.csv and truth.json into out_dir.
void cmd_synth(const SynthConfig& synth, const std::string& out_dir);

}  // namespace mutadetect

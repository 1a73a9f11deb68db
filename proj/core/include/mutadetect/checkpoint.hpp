#pragma once

#include <string>

#include "mutadetect/loss.hpp"
#include "mutadetect/model.hpp"

namespace mutadetect {

// A frozen model plus everything needed to score with it: the loss
// configuration (mode, center, clamps) and the validation-chosen threshold.
struct Checkpoint {
  ModelParams params;
  LossConfig loss;
  double threshold = 0.0;
  bool has_threshold = false;
};

// Versioned binary layout: magic + version, a JSON metadata block
// (hyperparameters, loss settings, threshold), then named tensors as raw
// little-endian doubles. Round-trips bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// The serialized bytes, for writers that combine artifacts.
std::string checkpoint_bytes(const Checkpoint& ck);

}  // namespace mutadetect

#pragma once

#include <string>
#include <vector>

#include "mutadetect/splits.hpp"

namespace mutadetect {

// Samples file: a header line {"format_version":1,"kind":"samples",...}
// followed by one JSON object per sample carrying split, position, label,
// provenance (window, chain, draw) and the T input vectors.

std::string samples_file_bytes(const DatasetSplits& splits);
void write_samples_file(const std::string& path, const DatasetSplits& splits);
DatasetSplits read_samples_file(const std::string& path);

// Split manifest: per window-group counts plus totals, for bookkeeping and
// the protocol checks.
struct GroupCounts {
  long long window = 0;
  std::size_t total = 0;
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

std::string manifest_bytes(const std::vector<GroupCounts>& groups);

}  // namespace mutadetect

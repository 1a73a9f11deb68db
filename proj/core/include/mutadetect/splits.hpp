#pragma once

#include <cstddef>
#include <vector>

#include "mutadetect/chains.hpp"

namespace mutadetect {

struct SplitSpec {
  double train_fraction = 0.8;
  double val_fraction_of_train = 0.1;
  std::size_t per_cohort_cap = 1000;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// Counts for one group of n samples: cap at per_cohort_cap, first 80% is the
// training pool and the rest is test, and the first 10% of the pool is
// validation. Floors throughout, with a minimum of 1 where a split would
// otherwise vanish while samples remain (n=1 -> 1/0/0, n=2 -> 1/0/1).
SplitCounts split_counts(std::size_t n, const SplitSpec& spec);

struct DatasetSplits {
  std::vector<SiteSample> train;
  std::vector<SiteSample> val;
  std::vector<SiteSample> test;
};

// Applies split_counts to each group in order, preserving sample order
// within each split. Groups correspond to cohort windows; order within a
// group is the stable corpus-derived order.
DatasetSplits split_dataset(std::vector<std::vector<SiteSample>> groups,
                            const SplitSpec& spec);

}  // namespace mutadetect

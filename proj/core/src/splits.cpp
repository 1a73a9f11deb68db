#include "mutadetect/splits.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mutadetect/error.hpp"
#include "mutadetect/log.hpp"

namespace mutadetect {

namespace {

// floor with a nudge so exact fraction products do not land one below.
std::size_t floor_frac(double frac, std::size_t n) {
  return static_cast<std::size_t>(frac * static_cast<double>(n) + 1e-9);
}

}  // namespace

SplitCounts split_counts(std::size_t n, const SplitSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
    throw ConfigError("train_fraction must lie in (0,1)");
  if (spec.val_fraction_of_train <= 0.0 || spec.val_fraction_of_train >= 1.0)
    throw ConfigError("val_fraction_of_train must lie in (0,1)");
  if (spec.per_cohort_cap == 0) throw ConfigError("per_cohort_cap must be positive");
  if (n == 0) throw DataError("cannot split an empty cohort group");

  if (n < 10)
    log_warn("cohort group has only " + std::to_string(n) +
             " samples; split counts fall back to floors with minimum 1");

  n = std::min(n, spec.per_cohort_cap);
  std::size_t pool = std::max<std::size_t>(1, floor_frac(spec.train_fraction, n));
  SplitCounts c;
  c.val = pool > 1 ? std::max<std::size_t>(1, floor_frac(spec.val_fraction_of_train, pool)) : 0;
  c.train = pool - c.val;
  c.test = n - pool;
  return c;
}

DatasetSplits split_dataset(std::vector<std::vector<SiteSample>> groups,
                            const SplitSpec& spec) {
  DatasetSplits out;
  for (auto& group : groups) {
    const SplitCounts c = split_counts(group.size(), spec);
    const std::size_t pool = c.train + c.val;
    for (std::size_t i = 0; i < pool + c.test; ++i) {
      auto& dst = i < c.val ? out.val : (i < pool ? out.train : out.test);
      dst.push_back(std::move(group[i]));
    }
  }
  return out;
}

}  // namespace mutadetect

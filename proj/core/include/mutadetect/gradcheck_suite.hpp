#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mutadetect {

struct GradCheckCase {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Finite-difference checks for every tape primitive (10 random points each,
// tolerance 1e-5) plus full encoder+loss paths at 1e-3. Shared by the CLI
// gradcheck command and the acceptance tests.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed);

}  // namespace mutadetect

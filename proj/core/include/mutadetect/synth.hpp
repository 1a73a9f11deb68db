#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mutadetect {

// Synthetic corpus with planted, learnable mutations. Each lineage carries
// one sequence per year (duplicated across its cohort members): a constant
// context letter around the tracked positions, an amplified separator-letter
// block after them (keeps lineages far apart for clustering and chaining),
// and tracked positions that mutate between consecutive years with the
// configured rate. A year whose next transition mutates position p displays
// the motif letter 'W' at p-2, p-1, p+1, p+2; 'W' is excluded from every
// other draw, so the final input year of a window reveals whether the label
// step mutates while the label itself still depends only on the residue at p.
//
// The generator also emits a trigram table whose vectors are the mean of
// per-letter vectors plus small trigram noise. Trigrams sharing letters are
// thereby similar (the structure pretrained tables have), which makes the
// motif a common linear direction instead of unrelated hash vectors.
struct SynthConfig {
  std::size_t cohorts = 10;
  std::size_t per_cohort = 20;
  std::size_t length = 50;
  std::size_t lineages = 3;
  double mutation_rate = 0.1;
  std::vector<std::size_t> positions;  // empty = every 5th in the front half
  long long start_year = 2000;
  std::size_t embed_dim = 16;  // dimension of the emitted trigram table
  std::uint64_t seed = 0;
};

struct PlantedMutation {
  std::size_t lineage = 0;
  std::size_t position = 0;
  long long year = 0;  // mutation happens on the transition year -> year+1
  char from = 'A';
  char to = 'A';
};

struct SynthResult {
  std::string corpus_csv;
  std::string truth_json;
  std::string table_tsv;  // compositional trigram vectors for the alphabet
  std::vector<PlantedMutation> mutations;
  std::vector<std::size_t> positions;  // the tracked set actually used
};

SynthResult generate_synthetic_corpus(const SynthConfig& cfg);

}  // namespace mutadetect

#pragma once

#include <cstdint>
#include <vector>

#include "mutadetect/corpus.hpp"
#include "mutadetect/embedding.hpp"
#include "mutadetect/kmeans.hpp"

namespace mutadetect {

struct ChainLink {
  long long time_index = 0;
  std::size_t cluster_id = 0;
  std::vector<std::size_t> member_indices;  // record indices within the cohort
};

// A path of nearest clusters across T+1 consecutive time steps: T input
// steps plus the label step.
struct ClusterChain {
  std::size_t id = 0;
  std::vector<ChainLink> links;
};

struct CohortClustering {
  long long time_index = 0;
  std::vector<Cluster> clusters;
};

// One chain per cluster of the earliest step, following nearest-centroid
// links forward. Steps must cover consecutive time indices.
std::vector<ClusterChain> build_chains(const std::vector<CohortClustering>& steps);

// One labeled example: the embedded vectors of one position across the T
// input steps, and whether the residue at that position changed between the
// last two steps (1 = unchanged/normal, 0 = mutated).
struct SiteSample {
  std::size_t position = 0;
  std::vector<std::vector<double>> inputs;  // T vectors of the table dimension
  int label = 1;
  std::size_t chain_id = 0;
  std::size_t draw_id = 0;
  long long window = 0;  // label-step time index of the originating window
};

// Draws `draws` record tuples from the chain (one record per link, each draw
// from its own sub-stream keyed by chain and draw id, so any parallel
// schedule reproduces the sequential output) and emits one SiteSample per
// (draw, position). `cohorts` must align with the chain's links.
std::vector<SiteSample> sample_time_series(const ClusterChain& chain,
                                           const std::vector<TimeCohort>& cohorts,
                                           const std::vector<std::size_t>& positions,
                                           std::size_t draws, std::uint64_t seed,
                                           const TrigramTable& table);

}  // namespace mutadetect

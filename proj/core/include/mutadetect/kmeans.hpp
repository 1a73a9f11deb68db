#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mutadetect {

// One cluster of records within a time cohort. members holds record indices
// in cohort order; ids are assigned by ascending first member, so they are
// reproducible and usable as deterministic tie-breakers.
struct Cluster {
  std::size_t id = 0;
  std::vector<double> centroid;
  std::vector<std::size_t> members;
};

// Lloyd k-means on the per-record embedding points. Initialization picks k
// distinct records from rng; iteration stops when assignments stabilize or
// after 100 rounds; an emptied cluster is reseeded with the point farthest
// from its centroid. `restarts` runs keep the lowest within-cluster SSE,
// which on the small cohorts here lands on the global optimum in practice.
// Cohorts smaller than k degrade to one singleton cluster per record.
std::vector<Cluster> cluster_cohort(const std::vector<std::vector<double>>& points,
                                    std::size_t k, std::mt19937_64& rng,
                                    std::size_t restarts = 8);

double within_cluster_sse(const std::vector<std::vector<double>>& points,
                          const std::vector<Cluster>& clusters);

// For each cluster at time t, the index (into `next`) of the next-step
// cluster with the nearest centroid; ties go to the lowest cluster id.
std::vector<std::size_t> link_clusters(const std::vector<Cluster>& at_t,
                                       const std::vector<Cluster>& next);

}  // namespace mutadetect

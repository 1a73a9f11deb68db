#include "mutadetect/chains.hpp"

#include <cstdint>
#include <string>

#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

std::vector<ClusterChain> build_chains(const std::vector<CohortClustering>& steps) {
  if (steps.size() < 2)
    throw ContractError("build_chains: need at least 2 clustered time steps");
  for (std::size_t s = 0; s + 1 < steps.size(); ++s)
    if (steps[s + 1].time_index != steps[s].time_index + 1)
      throw DataError("missing time step " + std::to_string(steps[s].time_index + 1) +
                      " between " + std::to_string(steps[s].time_index) + " and " +
                      std::to_string(steps[s + 1].time_index));
  for (const auto& step : steps)
    if (step.clusters.empty())
      throw ContractError("build_chains: time step " + std::to_string(step.time_index) +
                          " has no clusters");

  std::vector<std::vector<std::size_t>> links(steps.size() - 1);
  for (std::size_t s = 0; s + 1 < steps.size(); ++s)
    links[s] = link_clusters(steps[s].clusters, steps[s + 1].clusters);

  std::vector<ClusterChain> chains(steps[0].clusters.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    chains[c].id = c;
    chains[c].links.reserve(steps.size());
    std::size_t at = c;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const Cluster& cl = steps[s].clusters[at];
      chains[c].links.push_back({steps[s].time_index, cl.id, cl.members});
      if (s + 1 < steps.size()) at = links[s][at];
    }
  }
  return chains;
}

std::vector<SiteSample> sample_time_series(const ClusterChain& chain,
                                           const std::vector<TimeCohort>& cohorts,
                                           const std::vector<std::size_t>& positions,
                                           std::size_t draws, std::uint64_t seed,
                                           const TrigramTable& table) {
  const std::size_t steps = chain.links.size();
  if (steps < 2) throw ContractError("sample_time_series: chain needs at least 2 links");
  if (cohorts.size() != steps)
    throw ContractError("sample_time_series: " + std::to_string(cohorts.size()) +
                        " cohorts for " + std::to_string(steps) + " links");
  if (draws == 0) throw ContractError("sample_time_series: draws must be positive");
  if (positions.empty()) throw ContractError("sample_time_series: empty position set");

  for (std::size_t s = 0; s < steps; ++s) {
    if (cohorts[s].time_index != chain.links[s].time_index)
      throw ContractError("sample_time_series: cohort time " +
                          std::to_string(cohorts[s].time_index) + " does not match link time " +
                          std::to_string(chain.links[s].time_index));
    if (chain.links[s].member_indices.empty())
      throw DataError("empty cluster in chain " + std::to_string(chain.id) + " at time " +
                      std::to_string(chain.links[s].time_index));
  }

  const std::size_t len = cohorts[0].records.empty()
                              ? 0
                              : cohorts[0].records[0].residues.size();
  const std::size_t lo = min_embeddable_position();
  const std::size_t hi = max_embeddable_position(len);
  for (std::size_t p : positions)
    if (p < lo || p > hi)
      throw ConfigError("position " + std::to_string(p) +
                        " lacks trigram context (valid range [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "])");

  const std::size_t T = steps - 1;
  std::vector<SiteSample> out;
  out.reserve(draws * positions.size());
  std::vector<const SequenceRecord*> picked(steps);

  for (std::size_t d = 0; d < draws; ++d) {
    // Keyed by the window's first time step as well so the same chain id in
    // overlapping windows still gets an independent stream.
    auto rng = substream(
        seed, "chain-draws",
        {static_cast<std::uint64_t>(chain.links.front().time_index), chain.id,
         d});
    for (std::size_t s = 0; s < steps; ++s) {
      const auto& members = chain.links[s].member_indices;
      const std::size_t m = members[uniform_index(rng, members.size())];
      picked[s] = &cohorts[s].records[m];
    }
    for (std::size_t p : positions) {
      SiteSample sample;
      sample.position = p;
      sample.chain_id = chain.id;
      sample.draw_id = d;
      sample.inputs.reserve(T);
      for (std::size_t s = 0; s < T; ++s)
        sample.inputs.push_back(embed_position(*picked[s], p, table));
      sample.label =
          picked[steps - 1]->residues[p] == picked[steps - 2]->residues[p] ? 1 : 0;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

}  // namespace mutadetect

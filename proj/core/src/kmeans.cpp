#include "mutadetect/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct LloydRun {
  std::vector<std::size_t> assign;
  std::vector<std::vector<double>> centroids;
  double sse = std::numeric_limits<double>::infinity();
};

std::size_t nearest_centroid(const std::vector<double>& p,
                             const std::vector<std::vector<double>>& cent) {
  std::size_t best = 0;
  double best_d = sq_dist(p, cent[0]);
  for (std::size_t c = 1; c < cent.size(); ++c) {
    const double d = sq_dist(p, cent[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

LloydRun lloyd_once(const std::vector<std::vector<double>>& pts, std::size_t k,
                    std::mt19937_64& rng) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(order, rng);

  LloydRun run;
  run.centroids.resize(k);
  for (std::size_t c = 0; c < k; ++c) run.centroids[c] = pts[order[c]];
  run.assign.assign(n, 0);
  std::vector<std::size_t> prev(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> counts(k, 0);

  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i)
      run.assign[i] = nearest_centroid(pts[i], run.centroids);
    if (run.assign == prev) break;

    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t a : run.assign) ++counts[a];

    // An emptied cluster takes the point farthest from its current centroid,
    // drawn from a cluster that can spare one.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t pick = n;
      double pick_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[run.assign[i]] < 2) continue;
        const double d = sq_dist(pts[i], run.centroids[run.assign[i]]);
        if (d > pick_d) {
          pick_d = d;
          pick = i;
        }
      }
      if (pick == n) break;  // only singletons left; fewer distinct points than k
      --counts[run.assign[pick]];
      run.assign[pick] = c;
      ++counts[c];
    }
    prev = run.assign;

    const std::size_t dim = pts[0].size();
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0) run.centroids[c].assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& cent = run.centroids[run.assign[i]];
      for (std::size_t d = 0; d < dim; ++d) cent[d] += pts[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (double& v : run.centroids[c]) v /= static_cast<double>(counts[c]);
  }

  run.sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) run.sse += sq_dist(pts[i], run.centroids[run.assign[i]]);
  return run;
}

}  // namespace

std::vector<Cluster> cluster_cohort(const std::vector<std::vector<double>>& points,
                                    std::size_t k, std::mt19937_64& rng,
                                    std::size_t restarts) {
  if (points.empty()) throw ContractError("cluster_cohort: empty cohort");
  if (k == 0) throw ContractError("cluster_cohort: k must be at least 1");
  const std::size_t dim = points[0].size();
  if (dim == 0) throw ContractError("cluster_cohort: zero-dimensional embeddings");
  for (const auto& p : points)
    if (p.size() != dim)
      throw ContractError("cluster_cohort: inconsistent embedding dimensions (" +
                          std::to_string(dim) + " vs " + std::to_string(p.size()) + ")");

  std::vector<Cluster> out;
  if (points.size() < k) {
    out.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      out[i].id = i;
      out[i].centroid = points[i];
      out[i].members = {i};
    }
    return out;
  }

  LloydRun best;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    LloydRun run = lloyd_once(points, k, rng);
    if (run.sse < best.sse) best = std::move(run);
  }

  // Group members per cluster, then order clusters by first member so ids do
  // not depend on which restart won.
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < points.size(); ++i) members[best.assign[i]].push_back(i);
  std::vector<std::size_t> cluster_order;
  for (std::size_t c = 0; c < k; ++c)
    if (!members[c].empty()) cluster_order.push_back(c);
  std::sort(cluster_order.begin(), cluster_order.end(),
            [&](std::size_t a, std::size_t b) { return members[a][0] < members[b][0]; });

  out.resize(cluster_order.size());
  for (std::size_t i = 0; i < cluster_order.size(); ++i) {
    const std::size_t c = cluster_order[i];
    out[i].id = i;
    out[i].centroid = std::move(best.centroids[c]);
    out[i].members = std::move(members[c]);
  }
  return out;
}

double within_cluster_sse(const std::vector<std::vector<double>>& points,
                          const std::vector<Cluster>& clusters) {
  double sse = 0.0;
  for (const auto& cl : clusters)
    for (std::size_t m : cl.members) sse += sq_dist(points[m], cl.centroid);
  return sse;
}

std::vector<std::size_t> link_clusters(const std::vector<Cluster>& at_t,
                                       const std::vector<Cluster>& next) {
  if (at_t.empty() || next.empty())
    throw ContractError("link_clusters: empty cluster list");
  std::vector<std::size_t> mapping(at_t.size());
  for (std::size_t i = 0; i < at_t.size(); ++i) {
    std::size_t best = 0;
    double best_d = sq_dist(at_t[i].centroid, next[0].centroid);
    for (std::size_t j = 1; j < next.size(); ++j) {
      const double d = sq_dist(at_t[i].centroid, next[j].centroid);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    mapping[i] = best;
  }
  return mapping;
}

}  // namespace mutadetect

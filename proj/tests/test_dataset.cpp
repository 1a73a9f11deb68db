#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "mutadetect/chains.hpp"
#include "mutadetect/corpus.hpp"
#include "mutadetect/embedding.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"
#include "mutadetect/kmeans.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/splits.hpp"

using namespace mutadetect;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("test_dataset_") + name;
}

std::vector<std::vector<double>> toy_points(std::size_t n, std::size_t dim,
                                            std::mt19937_64& rng) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts)
    for (double& v : p) v = uniform_real(rng, -10.0, 10.0);
  return pts;
}

// Exhaustive minimum SSE over all assignments of n points to at most k
// clusters, each centroid the mean of its members.
double brute_force_sse(const std::vector<std::vector<double>>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts[0].size();
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::vector<double>> cent(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[assign[i]];
      for (std::size_t d = 0; d < dim; ++d) cent[assign[i]][d] += pts[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c])
        for (double& v : cent[c]) v /= static_cast<double>(count[c]);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pts[i][d] - cent[assign[i]][d];
        sse += diff * diff;
      }
    best = std::min(best, sse);

    std::size_t pos = 0;
    while (pos < n && assign[pos] == k - 1) assign[pos++] = 0;
    if (pos == n) break;
    ++assign[pos];
  }
  return best;
}

}  // namespace

TEST_CASE("csv corpus parses into sorted time cohorts") {
  const std::string path = temp_path("tiny.csv");
  write_file_atomic(path,
                    "id,time_index,sequence\n"
                    "b,2001,ACDEFG\n"
                    "a,2000,ACDEFG\n"
                    "c,2000,GGGGGG\n");
  auto cohorts = parse_corpus(path, CorpusFormat::csv);
  REQUIRE(cohorts.size() == 2);
  CHECK(cohorts[0].time_index == 2000);
  REQUIRE(cohorts[0].records.size() == 2);
  CHECK(cohorts[0].records[0].id == "a");  // file order within a cohort
  CHECK(cohorts[0].records[1].id == "c");
  CHECK(cohorts[1].records[0].id == "b");
  std::remove(path.c_str());
}

TEST_CASE("fasta headers accept year and month tags") {
  const std::string path = temp_path("tiny.fa");
  write_file_atomic(path,
                    ">s1 |year=1999| strain\nACDEF\nGHIKL\n"
                    ">s2 |month=2000-03|\nMNPQR\nSTVWY\n");
  auto cohorts = parse_corpus(path, CorpusFormat::fasta);
  REQUIRE(cohorts.size() == 2);
  CHECK(cohorts[0].time_index == 1999);
  CHECK(cohorts[0].records[0].residues == "ACDEFGHIKL");  // wrapped lines join
  CHECK(cohorts[1].time_index == 2000 * 12 + 2);
  std::remove(path.c_str());
}

TEST_CASE("fasta without a time tag is a data error") {
  const std::string path = temp_path("notag.fa");
  write_file_atomic(path, ">s1 no tag here\nACDEF\n");
  CHECK_THROWS_AS(parse_corpus(path, CorpusFormat::fasta), DataError);
  std::remove(path.c_str());
}

TEST_CASE("format inference follows the extension") {
  CHECK(corpus_format_from_path("x/y.csv") == CorpusFormat::csv);
  CHECK(corpus_format_from_path("x/y.fasta") == CorpusFormat::fasta);
  CHECK(corpus_format_from_path("x/y.fa") == CorpusFormat::fasta);
}

TEST_CASE("sanitize maps ambiguity codes into their sets") {
  auto rng = substream(5, "san");
  for (int i = 0; i < 200; ++i) {
    const char b = sanitize_residue('B', rng);
    CHECK((b == 'D' || b == 'N'));
    const char z = sanitize_residue('Z', rng);
    CHECK((z == 'E' || z == 'Q'));
    const char j = sanitize_residue('J', rng);
    CHECK((j == 'I' || j == 'L'));
    CHECK(is_canonical_residue(sanitize_residue('X', rng)));
  }
  CHECK_THROWS_AS(sanitize_residue('*', rng), DataError);
  CHECK_THROWS_AS(sanitize_residue('1', rng), DataError);
}

TEST_CASE("canonical letters pass through without consuming randomness") {
  auto rng = substream(6, "san-pass");
  auto rng_ref = substream(6, "san-pass");
  for (char c : std::string(kCanonicalResidues)) CHECK(sanitize_residue(c, rng) == c);
  CHECK(rng() == rng_ref());  // same state as an untouched engine
}

TEST_CASE("X resolves uniformly over the canonical alphabet") {
  auto rng = substream(7, "san-x");
  std::vector<int> hist(256, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    ++hist[static_cast<unsigned char>(sanitize_residue('X', rng))];
  for (char c : std::string(kCanonicalResidues)) {
    const double freq = hist[static_cast<unsigned char>(c)] / static_cast<double>(n);
    CHECK(freq == doctest::Approx(1.0 / 20.0).epsilon(0.4));  // 0.05 +- 0.02
    CHECK(std::abs(freq - 0.05) < 0.02);
  }
}

TEST_CASE("sanitize_cohorts is order-independent and idempotent") {
  std::vector<TimeCohort> a(2);
  a[0].time_index = 2000;
  a[0].records = {{"r0", 2000, "AXBZ"}, {"r1", 2000, "JXXA"}};
  a[1].time_index = 2001;
  a[1].records = {{"r2", 2001, "BBBB"}};
  auto b = a;
  sanitize_cohorts(a, 99);
  sanitize_cohorts(b, 99);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t r = 0; r < a[i].records.size(); ++r)
      CHECK(a[i].records[r].residues == b[i].records[r].residues);

  auto again = a;
  sanitize_cohorts(again, 99);  // already canonical, second pass changes nothing
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t r = 0; r < a[i].records.size(); ++r)
      CHECK(again[i].records[r].residues == a[i].records[r].residues);
}

TEST_CASE("kmeans reaches the brute-force optimum on small instances") {
  auto rng = substream(8, "km");
  int optimal = 0;
  const int instances = 20;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 3 + uniform_index(rng, 6);  // 3..8
    const std::size_t k = 1 + uniform_index(rng, 3);
    const std::size_t dim = 1 + uniform_index(rng, 2);
    if (n < k) continue;
    auto pts = toy_points(n, dim, rng);
    auto init_rng = substream(8, "km-init", {static_cast<std::uint64_t>(t)});
    auto clusters = cluster_cohort(pts, k, init_rng, 16);
    const double sse = within_cluster_sse(pts, clusters);
    const double best = brute_force_sse(pts, k);
    CHECK(sse <= best * 1.05 + 1e-9);
    if (sse <= best + 1e-9) ++optimal;
  }
  CHECK(optimal >= instances - 2);
}

TEST_CASE("kmeans keeps cluster ids stable and members partitioned") {
  auto rng = substream(9, "km-stable");
  auto pts = toy_points(8, 2, rng);
  auto r1 = substream(9, "km-run");
  auto c1 = cluster_cohort(pts, 3, r1, 8);
  auto r2 = substream(9, "km-run");
  auto c2 = cluster_cohort(pts, 3, r2, 8);
  REQUIRE(c1.size() == c2.size());
  std::vector<bool> seen(8, false);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    CHECK(c1[i].id == i);  // ids ordered by first member
    CHECK(c1[i].members == c2[i].members);
    for (std::size_t m : c1[i].members) {
      CHECK(!seen[m]);
      seen[m] = true;
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }));
}

TEST_CASE("fewer points than k yields singleton clusters") {
  auto rng = substream(10, "km-small");
  auto pts = toy_points(2, 2, rng);
  auto clusters = cluster_cohort(pts, 3, rng, 4);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].members == std::vector<std::size_t>{0});
  CHECK(clusters[1].members == std::vector<std::size_t>{1});
}

TEST_CASE("link_clusters picks the nearest next centroid") {
  std::vector<Cluster> a(2), b(2);
  a[0].centroid = {0.0, 0.0};
  a[1].centroid = {10.0, 0.0};
  b[0].centroid = {9.0, 1.0};
  b[1].centroid = {1.0, -1.0};
  auto mapping = link_clusters(a, b);
  CHECK(mapping[0] == 1);
  CHECK(mapping[1] == 0);
}

TEST_CASE("build_chains follows nearest centroids across steps") {
  std::vector<CohortClustering> steps(3);
  for (int t = 0; t < 3; ++t) {
    steps[t].time_index = 2000 + t;
    steps[t].clusters.resize(2);
    for (int c = 0; c < 2; ++c) {
      steps[t].clusters[c].id = c;
      // cluster 0 drifts slowly around x=0, cluster 1 around x=10
      steps[t].clusters[c].centroid = {c * 10.0 + 0.1 * t, 0.0};
      steps[t].clusters[c].members = {static_cast<std::size_t>(c)};
    }
  }
  auto chains = build_chains(steps);
  REQUIRE(chains.size() == 2);
  for (const auto& chain : chains) {
    REQUIRE(chain.links.size() == 3);
    for (int t = 0; t < 3; ++t) {
      CHECK(chain.links[t].time_index == 2000 + t);
      CHECK(chain.links[t].cluster_id == chain.links[0].cluster_id);
    }
  }
}

TEST_CASE("build_chains rejects non-consecutive steps") {
  std::vector<CohortClustering> steps(2);
  steps[0].time_index = 2000;
  steps[1].time_index = 2002;
  steps[0].clusters.resize(1);
  steps[1].clusters.resize(1);
  steps[0].clusters[0].centroid = {0.0};
  steps[1].clusters[0].centroid = {0.0};
  steps[0].clusters[0].members = {0};
  steps[1].clusters[0].members = {0};
  CHECK_THROWS_AS(build_chains(steps), DataError);
}

TEST_CASE("sample_time_series labels follow the last transition") {
  // Three cohorts of one record each; position 3 mutates on the final
  // transition, position 8 never does.
  std::vector<TimeCohort> cohorts(3);
  const std::string base = "AAACAAAADAAA";
  for (int t = 0; t < 3; ++t) {
    cohorts[t].time_index = 2000 + t;
    std::string seq = base;
    if (t == 2) seq[3] = 'E';
    cohorts[t].records = {{"r" + std::to_string(t), 2000 + t, seq}};
  }

  ClusterChain chain;
  chain.id = 0;
  for (int t = 0; t < 3; ++t) chain.links.push_back({2000 + t, 0, {0}});

  TrigramTable table(4, 17);
  auto samples = sample_time_series(chain, cohorts, {3, 8}, 5, 123, table);
  REQUIRE(samples.size() == 10);  // draws x positions
  for (const auto& s : samples) {
    REQUIRE(s.inputs.size() == 2);  // T = links - 1 input steps
    REQUIRE(s.inputs[0].size() == 4);
    CHECK(s.label == (s.position == 3 ? 0 : 1));
    // inputs come from the input steps, never the label step
    const auto x0 = embed_position(cohorts[0].records[0], s.position, table);
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.inputs[0][i] == x0[i]);
  }
}

TEST_CASE("sample_time_series draws are reproducible per (chain, draw)") {
  std::vector<TimeCohort> cohorts(2);
  for (int t = 0; t < 2; ++t) {
    cohorts[t].time_index = t;
    for (int r = 0; r < 4; ++r)
      cohorts[t].records.push_back({"r", t, "ACDEFGHIK"});
  }
  ClusterChain chain;
  chain.id = 1;
  chain.links.push_back({0, 0, {0, 1, 2, 3}});
  chain.links.push_back({1, 0, {0, 1, 2, 3}});
  TrigramTable table(3, 5);
  auto a = sample_time_series(chain, cohorts, {4}, 7, 55, table);
  auto b = sample_time_series(chain, cohorts, {4}, 7, 55, table);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].draw_id == b[i].draw_id);
    CHECK(a[i].inputs == b[i].inputs);
  }
}

TEST_CASE("split_counts follows the protocol arithmetic") {
  SplitSpec spec;
  auto c = split_counts(1000, spec);
  CHECK(c.train == 720);
  CHECK(c.val == 80);
  CHECK(c.test == 200);

  c = split_counts(5000, spec);  // capped at 1000 first
  CHECK(c.train == 720);
  CHECK(c.val == 80);
  CHECK(c.test == 200);

  c = split_counts(10, spec);
  CHECK(c.train == 7);
  CHECK(c.val == 1);
  CHECK(c.test == 2);

  c = split_counts(1, spec);
  CHECK(c.train == 1);
  CHECK(c.val == 0);
  CHECK(c.test == 0);

  c = split_counts(2, spec);
  CHECK(c.train == 1);
  CHECK(c.val == 0);
  CHECK(c.test == 1);

  CHECK_THROWS_AS(split_counts(0, spec), DataError);

  SplitSpec bad;
  bad.train_fraction = 1.0;
  CHECK_THROWS_AS(split_counts(10, bad), ConfigError);
}

TEST_CASE("split_dataset is positional: val first, then train, then test") {
  std::vector<std::vector<SiteSample>> groups(1);
  for (int i = 0; i < 10; ++i) {
    SiteSample s;
    s.position = static_cast<std::size_t>(i);
    groups[0].push_back(s);
  }
  SplitSpec spec;
  auto splits = split_dataset(std::move(groups), spec);
  REQUIRE(splits.val.size() == 1);
  REQUIRE(splits.train.size() == 7);
  REQUIRE(splits.test.size() == 2);
  CHECK(splits.val[0].position == 0);
  CHECK(splits.train[0].position == 1);
  CHECK(splits.train[6].position == 7);
  CHECK(splits.test[0].position == 8);
  CHECK(splits.test[1].position == 9);
}

TEST_CASE("split_dataset caps each group independently") {
  std::vector<std::vector<SiteSample>> groups(2);
  for (int g = 0; g < 2; ++g)
    for (int i = 0; i < 1200; ++i) groups[g].push_back(SiteSample{});
  SplitSpec spec;
  auto splits = split_dataset(std::move(groups), spec);
  CHECK(splits.train.size() == 2 * 720);
  CHECK(splits.val.size() == 2 * 80);
  CHECK(splits.test.size() == 2 * 200);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "mutadetect/embedding.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"

using namespace mutadetect;

TEST_CASE("fallback vectors are deterministic, seeded, in range") {
  auto a = fallback_vector("ACD", 11, 8);
  auto b = fallback_vector("ACD", 11, 8);
  CHECK(a == b);
  for (double v : a) {
    CHECK(v >= -0.5);
    CHECK(v < 0.5);
  }
  CHECK(fallback_vector("ACD", 12, 8) != a);  // seed matters
  CHECK(fallback_vector("ACE", 11, 8) != a);  // trigram matters
}

TEST_CASE("table load infers dim and counts fallbacks") {
  const std::string path = "test_embed_table.tsv";
  write_file_atomic(path,
                    "ACD\t1.0\t2.0\t3.0\n"
                    "CDE\t-1.5\t0.25\t4.0\n");
  TrigramTable table = TrigramTable::load(path, 7);
  CHECK(table.dim() == 3);
  CHECK(table.entry_count() == 2);
  CHECK(table.fallback_count() == 0);

  auto hit = table.lookup("ACD");
  CHECK(hit == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(table.fallback_count() == 0);

  auto miss = table.lookup("YYY");
  CHECK(miss == fallback_vector("YYY", 7, 3));
  CHECK(table.fallback_count() == 1);
  std::remove(path.c_str());
}

TEST_CASE("duplicate trigram rows overwrite") {
  const std::string path = "test_embed_dup.tsv";
  write_file_atomic(path,
                    "ACD\t1.0\t2.0\n"
                    "ACD\t9.0\t9.0\n");
  TrigramTable table = TrigramTable::load(path, 0);
  CHECK(table.entry_count() == 1);
  CHECK(table.lookup("ACD") == std::vector<double>{9.0, 9.0});
  std::remove(path.c_str());
}

TEST_CASE("ragged table rows are a data error") {
  const std::string path = "test_embed_ragged.tsv";
  write_file_atomic(path,
                    "ACD\t1.0\t2.0\n"
                    "CDE\t1.0\n");
  CHECK_THROWS_AS(TrigramTable::load(path, 0), DataError);
  std::remove(path.c_str());
}

TEST_CASE("fallback-only table synthesizes every lookup") {
  TrigramTable table(5, 21);
  CHECK(table.dim() == 5);
  CHECK(table.entry_count() == 0);
  CHECK(table.lookup("AAA") == fallback_vector("AAA", 21, 5));
  CHECK(table.fallback_count() == 1);
}

TEST_CASE("embeddable range is [2, length-3]") {
  CHECK(min_embeddable_position() == 2);
  CHECK(max_embeddable_position(5) == 2);
  CHECK(max_embeddable_position(50) == 47);
  CHECK_THROWS_AS(max_embeddable_position(4), DataError);
}

TEST_CASE("embed_position averages the three covering trigrams") {
  TrigramTable table(4, 9);
  SequenceRecord rec{"r", 0, "ACDEFGH"};
  const std::size_t p = 3;  // trigrams CDE, DEF, EFG
  auto x = embed_position(rec, p, table);
  auto t1 = table.lookup("CDE");
  auto t2 = table.lookup("DEF");
  auto t3 = table.lookup("EFG");
  REQUIRE(x.size() == 4);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(x[i] == doctest::Approx((t1[i] + t2[i] + t3[i]) / 3.0).epsilon(1e-14));

  CHECK_THROWS_AS(embed_position(rec, 1, table), ContractError);
  CHECK_THROWS_AS(embed_position(rec, 5, table), ContractError);
}

TEST_CASE("record mean equals the direct mean over embeddable positions") {
  TrigramTable table(6, 31);
  SequenceRecord rec{"r", 0, "ACDEFGHIKLMNP"};
  auto mean = record_mean_embedding(rec, table);
  std::vector<double> direct(6, 0.0);
  const std::size_t lo = min_embeddable_position();
  const std::size_t hi = max_embeddable_position(rec.residues.size());
  for (std::size_t p = lo; p <= hi; ++p) {
    auto x = embed_position(rec, p, table);
    for (std::size_t i = 0; i < 6; ++i) direct[i] += x[i];
  }
  for (double& v : direct) v /= static_cast<double>(hi - lo + 1);
  REQUIRE(mean.size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(mean[i] == doctest::Approx(direct[i]).epsilon(1e-12));
}

TEST_CASE("lookup_into resizes the output buffer") {
  TrigramTable table(3, 2);
  std::vector<double> out;
  table.lookup_into("ACD", out);
  CHECK(out.size() == 3);
  table.lookup_into("ACD", out);  // reuse without growth
  CHECK(out.size() == 3);
}

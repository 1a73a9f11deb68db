#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mutadetect {

inline constexpr char kCanonicalResidues[] = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr std::size_t kCanonicalCount = 20;

bool is_canonical_residue(char c);

// One aligned amino-acid sequence with its time index. For yearly corpora
// time_index is the year; monthly headers are flattened to year*12 + (month-1)
// so consecutive time steps always differ by 1.
struct SequenceRecord {
  std::string id;
  long long time_index = 0;
  std::string residues;
};

// All records sharing one time index, in file order. File order matters:
// the split protocol takes the "first" samples of each cohort.
struct TimeCohort {
  long long time_index = 0;
  std::vector<SequenceRecord> records;
};

enum class CorpusFormat { csv, fasta };

// CSV needs a header "id,time_index,sequence". FASTA headers must carry a
// "|year=YYYY|" or "|month=YYYY-MM|" tag. Cohorts come back sorted by
// time_index, records in file order, residues not yet sanitized.
std::vector<TimeCohort> parse_corpus(const std::string& path, CorpusFormat format);

// Infers the format from the extension (.csv vs .fa/.fasta/.fna).
CorpusFormat corpus_format_from_path(const std::string& path);

// IUPAC ambiguity codes resolve to a random member of their set:
// 'B'->{D,N}, 'Z'->{E,Q}, 'J'->{I,L}, 'X'->any canonical letter.
// Canonical letters pass through without touching the rng.
char sanitize_residue(char symbol, std::mt19937_64& rng);

// In-place sanitization. Each record gets its own sub-stream keyed by
// (cohort position, record position), so the result is independent of
// processing order.
void sanitize_cohorts(std::vector<TimeCohort>& cohorts, std::uint64_t seed);

}  // namespace mutadetect

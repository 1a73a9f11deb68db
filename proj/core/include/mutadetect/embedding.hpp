#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mutadetect/corpus.hpp"

namespace mutadetect {

// Deterministic stand-in vector for a trigram absent from the table (or for
// fallback-only runs): entries uniform in [-0.5, 0.5], fixed by (seed, trigram).
std::vector<double> fallback_vector(std::string_view trigram, std::uint64_t seed,
                                    std::size_t dim);

// Trigram -> d-dimensional vector. Immutable after construction; lookups for
// canonical trigrams always succeed because misses fall back to
// fallback_vector (counted, reported once by the caller).
class TrigramTable {
 public:
  // Fallback-only table: every lookup is synthesized.
  TrigramTable(std::size_t dim, std::uint64_t fallback_seed);

  // The miss counter is atomic, which deletes the default special members.
  TrigramTable(TrigramTable&& other) noexcept
      : dim_(other.dim_),
        fallback_seed_(other.fallback_seed_),
        entries_(std::move(other.entries_)),
        fallback_count_(other.fallback_count_.load()) {}
  TrigramTable& operator=(TrigramTable&&) = delete;
  TrigramTable(const TrigramTable&) = delete;
  TrigramTable& operator=(const TrigramTable&) = delete;

  // TSV rows: trigram, then dim tab-separated reals. dim is inferred from the
  // first row; a duplicate trigram overwrites with a warning.
  static TrigramTable load(const std::string& path, std::uint64_t fallback_seed);

  std::size_t dim() const { return dim_; }
  std::size_t entry_count() const { return entries_.size(); }
  std::uint64_t fallback_seed() const { return fallback_seed_; }
  std::size_t fallback_count() const { return fallback_count_.load(); }

  // Writes the trigram's vector into out (resized to dim).
  void lookup_into(std::string_view trigram, std::vector<double>& out) const;
  std::vector<double> lookup(std::string_view trigram) const;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::size_t dim_ = 0;
  std::uint64_t fallback_seed_ = 0;
  std::unordered_map<std::string, std::vector<double>, StringHash, std::equal_to<>> entries_;
  mutable std::atomic<std::size_t> fallback_count_{0};
};

// Smallest and largest position with full trigram context on both neighbors:
// x_p averages the trigrams centered at p-1, p, p+1, so p-2 and p+2 must
// exist. Valid positions are [2, length-3].
std::size_t min_embeddable_position();
std::size_t max_embeddable_position(std::size_t length);

// x_p = (v_{p-1} + v_p + v_{p+1}) / 3, where v_j is the vector of the
// trigram residues[j-1..j+1]. The record must be sanitized.
std::vector<double> embed_position(const SequenceRecord& record, std::size_t position,
                                   const TrigramTable& table);

// Mean of embed_position over every embeddable position. Used as the
// per-record point for clustering.
std::vector<double> record_mean_embedding(const SequenceRecord& record,
                                          const TrigramTable& table);

}  // namespace mutadetect

#include "mutadetect/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "json.hpp"

#include "mutadetect/corpus.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

// Tail letters reserved as lineage separators. They fill the stretch of the
// sequence past the tracked positions, and their vectors are amplified in
// the emitted table, so lineages stay far apart in record-mean embedding
// space no matter how strongly a motif marker perturbs a record.
constexpr const char* kSeparators = "QRSTVY";

bool is_separator(char c) {
  for (const char* s = kSeparators; *s; ++s)
    if (*s == c) return true;
  return false;
}

// Canonical alphabet minus the motif letter and the separators, so 'W' only
// ever appears as a mutation marker and separators only in the tail block.
std::string draw_alphabet() {
  std::string out;
  for (char c : std::string(kCanonicalResidues)) {
    if (c != 'W' && !is_separator(c)) out.push_back(c);
  }
  return out;
}

char draw_letter(const std::string& alphabet, std::mt19937_64& rng) {
  return alphabet[uniform_index(rng, alphabet.size())];
}

char draw_letter_excluding(const std::string& alphabet, char current,
                           std::mt19937_64& rng) {
  std::size_t idx = uniform_index(rng, alphabet.size() - 1);
  char pick = alphabet[idx];
  if (pick == current) pick = alphabet.back();
  return pick;
}

std::string fmt_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// vector(abc) = (r(a) + r(b) + r(c)) / 3 + noise, covering every canonical
// trigram so lookups never fall back. Residue vectors span [-4, 4]: large
// enough that one residue swap moves the inputs by O(1), which plain SGD at
// small learning rates needs to pick the signal up quickly.
std::string compositional_table(std::size_t dim, std::uint64_t seed) {
  std::vector<std::vector<double>> residue_vec(kCanonicalCount,
                                               std::vector<double>(dim));
  for (std::size_t i = 0; i < kCanonicalCount; ++i) {
    const char letter = kCanonicalResidues[i];
    auto rng = substream(seed, "synth-residue",
                         {static_cast<std::uint64_t>(letter)});
    // The motif letter gets a much larger vector, so marked positions stand
    // out in input norm as well as direction: the kind of separation a
    // hypersphere score picks up fastest. Separator letters get a milder
    // boost that keeps lineage blocks dominant in record means.
    const double amp = letter == 'W' ? 20.0 : is_separator(letter) ? 12.0 : 4.0;
    for (double& v : residue_vec[i]) v = uniform_real(rng, -amp, amp);
  }

  std::string tsv;
  tsv.reserve(kCanonicalCount * kCanonicalCount * kCanonicalCount * (4 + dim * 12));
  char tri[4] = {0, 0, 0, 0};
  for (std::size_t a = 0; a < kCanonicalCount; ++a) {
    for (std::size_t b = 0; b < kCanonicalCount; ++b) {
      for (std::size_t c = 0; c < kCanonicalCount; ++c) {
        tri[0] = kCanonicalResidues[a];
        tri[1] = kCanonicalResidues[b];
        tri[2] = kCanonicalResidues[c];
        auto noise = substream(seed, "synth-trigram", {fnv1a64(tri)});
        tsv += tri;
        for (std::size_t j = 0; j < dim; ++j) {
          const double v =
              (residue_vec[a][j] + residue_vec[b][j] + residue_vec[c][j]) / 3.0 +
              0.25 * uniform_real(noise, -0.5, 0.5);
          tsv += '\t';
          tsv += fmt_value(v);
        }
        tsv += '\n';
      }
    }
  }
  return tsv;
}

}  // namespace

SynthResult generate_synthetic_corpus(const SynthConfig& cfg) {
  if (cfg.cohorts < 2) {
    throw ConfigError("synthetic corpus needs at least 2 cohorts");
  }
  if (cfg.per_cohort == 0) throw ConfigError("cohort size must be positive");
  if (cfg.length < 5) {
    throw ConfigError("sequence length must be at least 5");
  }
  if (cfg.lineages == 0 || cfg.lineages > cfg.per_cohort) {
    throw ConfigError("lineage count must be in [1, cohort size]");
  }
  if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0)) {
    throw ConfigError("mutation rate must be in [0, 1]");
  }
  if (cfg.embed_dim == 0) throw ConfigError("embedding dimension must be positive");

  std::vector<std::size_t> positions = cfg.positions;
  if (positions.empty()) {
    // Keep tracked positions in the front half so the back half stays a pure
    // lineage-separator block; fall back to the full range when the sequence
    // is too short to spare one.
    for (std::size_t p = 2; p + 3 <= cfg.length && p + 2 < cfg.length / 2; p += 5)
      positions.push_back(p);
    if (positions.empty()) {
      for (std::size_t p = 2; p + 3 <= cfg.length; p += 5) positions.push_back(p);
    }
  }
  std::sort(positions.begin(), positions.end());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] < 2 || positions[i] + 3 > cfg.length) {
      throw ConfigError("tracked position " + std::to_string(positions[i]) +
                        " is outside the embeddable range [2, " +
                        std::to_string(cfg.length - 3) + "]");
    }
    if (i > 0 && positions[i] - positions[i - 1] < 5) {
      throw ConfigError(
          "tracked positions must be at least 5 apart so motif markers do "
          "not collide");
    }
  }

  const std::string alphabet = draw_alphabet();
  std::mt19937_64 rng = substream(cfg.seed, "synth", {});

  // Static per-lineage backbone: a per-lineage context letter around the
  // tracked positions, then an amplified separator letter from the first
  // motif-free slot onward. The separator block keeps lineages far apart in
  // record-mean embedding space, so per-year clustering and year-to-year
  // chain linking stay correct no matter how strongly a motif marker
  // perturbs a record.
  const std::size_t separator_start = positions.back() + 3;
  const std::size_t n_sep = std::string(kSeparators).size();
  std::vector<std::string> base(cfg.lineages, std::string(cfg.length, 'A'));
  for (std::size_t l = 0; l < cfg.lineages; ++l) {
    const char context = alphabet[(l * alphabet.size()) / cfg.lineages];
    const char separator = kSeparators[l % n_sep];
    for (std::size_t p = 0; p < cfg.length; ++p) {
      base[l][p] = p < separator_start ? context : separator;
    }
  }

  // residue[l][j][y] = residue of lineage l at tracked position positions[j]
  // in year index y.
  std::vector<std::vector<std::vector<char>>> residue(
      cfg.lineages,
      std::vector<std::vector<char>>(positions.size(),
                                     std::vector<char>(cfg.cohorts, 'A')));
  for (std::size_t l = 0; l < cfg.lineages; ++l) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      residue[l][j][0] = draw_letter(alphabet, rng);
    }
  }

  std::vector<PlantedMutation> mutations;
  for (std::size_t y = 0; y + 1 < cfg.cohorts; ++y) {
    for (std::size_t l = 0; l < cfg.lineages; ++l) {
      for (std::size_t j = 0; j < positions.size(); ++j) {
        char cur = residue[l][j][y];
        bool mutate = uniform_unit(rng) < cfg.mutation_rate;
        if (mutate) {
          char nxt = draw_letter_excluding(alphabet, cur, rng);
          residue[l][j][y + 1] = nxt;
          mutations.push_back(PlantedMutation{
              l, positions[j], cfg.start_year + static_cast<long long>(y), cur,
              nxt});
        } else {
          residue[l][j][y + 1] = cur;
        }
      }
    }
  }

  // Year sequences per lineage: backbone + tracked residues + motif markers.
  std::vector<std::vector<std::string>> year_seq(
      cfg.lineages, std::vector<std::string>(cfg.cohorts));
  for (std::size_t l = 0; l < cfg.lineages; ++l) {
    for (std::size_t y = 0; y < cfg.cohorts; ++y) {
      std::string seq = base[l];
      for (std::size_t j = 0; j < positions.size(); ++j) {
        std::size_t p = positions[j];
        seq[p] = residue[l][j][y];
        bool mutates_next =
            y + 1 < cfg.cohorts && residue[l][j][y + 1] != residue[l][j][y];
        if (mutates_next) {
          // All four motif slots sit inside every trigram window of p, so
          // the marker carries 2/3 of the position's embedded vector.
          seq[p - 2] = 'W';
          seq[p - 1] = 'W';
          seq[p + 1] = 'W';
          seq[p + 2] = 'W';
        }
      }
      year_seq[l][y] = std::move(seq);
    }
  }

  std::string csv = "id,time_index,sequence\n";
  for (std::size_t y = 0; y < cfg.cohorts; ++y) {
    long long year = cfg.start_year + static_cast<long long>(y);
    for (std::size_t i = 0; i < cfg.per_cohort; ++i) {
      std::size_t l = i % cfg.lineages;
      csv += "L" + std::to_string(l) + "_Y" + std::to_string(year) + "_R" +
             std::to_string(i);
      csv += "," + std::to_string(year) + "," + year_seq[l][y] + "\n";
    }
  }

  nlohmann::json truth;
  truth["format_version"] = 1;
  truth["kind"] = "synth_truth";
  truth["params"] = {
      {"cohorts", cfg.cohorts},       {"per_cohort", cfg.per_cohort},
      {"length", cfg.length},         {"lineages", cfg.lineages},
      {"mutation_rate", cfg.mutation_rate},
      {"start_year", cfg.start_year}, {"seed", cfg.seed},
  };
  truth["positions"] = positions;
  truth["mutations"] = nlohmann::json::array();
  for (const PlantedMutation& m : mutations) {
    truth["mutations"].push_back({{"lineage", m.lineage},
                                  {"position", m.position},
                                  {"year", m.year},
                                  {"from", std::string(1, m.from)},
                                  {"to", std::string(1, m.to)}});
  }
  truth["mutation_count"] = mutations.size();

  SynthResult out;
  out.corpus_csv = std::move(csv);
  out.truth_json = truth.dump(2) + "\n";
  out.table_tsv = compositional_table(cfg.embed_dim, cfg.seed);
  out.mutations = std::move(mutations);
  out.positions = std::move(positions);
  return out;
}

}  // namespace mutadetect

#include "mutadetect/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

constexpr std::array<bool, 256> make_canonical_mask() {
  std::array<bool, 256> m{};
  for (std::size_t i = 0; i < kCanonicalCount; ++i)
    m[static_cast<unsigned char>(kCanonicalResidues[i])] = true;
  return m;
}

constexpr auto kCanonicalMask = make_canonical_mask();

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t'))
    s.pop_back();
  return s;
}

void uppercase_letters(std::string& s) {
  for (char& c : s)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

long long parse_int(const std::string& s, const std::string& where) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(where + ": '" + s + "' is not an integer");
  return v;
}

struct RawRecord {
  SequenceRecord rec;
  std::size_t line = 0;
};

std::vector<RawRecord> parse_csv(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw DataError(path + ": no records");
  ++lineno;
  if (rstrip(line) != "id,time_index,sequence")
    throw DataError(path + ": expected header 'id,time_index,sequence', got '" + rstrip(line) + "'");

  std::vector<RawRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw DataError(where + ": expected 3 comma-separated fields");
    RawRecord r;
    r.line = lineno;
    r.rec.id = line.substr(0, c1);
    r.rec.time_index = parse_int(line.substr(c1 + 1, c2 - c1 - 1), where);
    r.rec.residues = line.substr(c2 + 1);
    if (r.rec.id.empty()) throw DataError(where + ": empty id");
    if (r.rec.residues.empty()) throw DataError(where + ": empty sequence");
    uppercase_letters(r.rec.residues);
    out.push_back(std::move(r));
  }
  return out;
}

// Accepts "|year=YYYY|" or "|month=YYYY-MM|" anywhere in the header.
long long time_index_from_header(const std::string& header, const std::string& where) {
  auto ypos = header.find("|year=");
  if (ypos != std::string::npos) {
    auto end = header.find('|', ypos + 6);
    if (end == std::string::npos)
      throw DataError(where + ": unterminated year tag");
    return parse_int(header.substr(ypos + 6, end - ypos - 6), where);
  }
  auto mpos = header.find("|month=");
  if (mpos != std::string::npos) {
    auto end = header.find('|', mpos + 7);
    if (end == std::string::npos)
      throw DataError(where + ": unterminated month tag");
    std::string tag = header.substr(mpos + 7, end - mpos - 7);
    auto dash = tag.find('-');
    if (dash == std::string::npos)
      throw DataError(where + ": month tag must be YYYY-MM");
    long long year = parse_int(tag.substr(0, dash), where);
    long long month = parse_int(tag.substr(dash + 1), where);
    if (month < 1 || month > 12)
      throw DataError(where + ": month " + std::to_string(month) + " out of range");
    return year * 12 + (month - 1);
  }
  throw DataError(where + ": header lacks a |year=YYYY| or |month=YYYY-MM| tag");
}

std::vector<RawRecord> parse_fasta(std::istream& in, const std::string& path) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool have_open = false;
  RawRecord cur;

  auto flush = [&]() {
    if (!have_open) return;
    if (cur.rec.residues.empty())
      throw DataError(path + ":" + std::to_string(cur.line) + ": record '" + cur.rec.id +
                      "' has an empty sequence");
    out.push_back(std::move(cur));
    cur = RawRecord{};
    have_open = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    line = rstrip(line);
    if (line.empty()) continue;
    if (line[0] == '>') {
      flush();
      const std::string where = path + ":" + std::to_string(lineno);
      std::string header = line.substr(1);
      auto idend = header.find_first_of("| \t");
      cur.rec.id = header.substr(0, idend);
      if (cur.rec.id.empty()) throw DataError(where + ": empty record id");
      cur.rec.time_index = time_index_from_header(header, where);
      cur.line = lineno;
      have_open = true;
    } else {
      if (!have_open)
        throw DataError(path + ":" + std::to_string(lineno) + ": sequence data before any header");
      uppercase_letters(line);
      cur.rec.residues += line;
    }
  }
  flush();
  return out;
}

}  // namespace

bool is_canonical_residue(char c) {
  return kCanonicalMask[static_cast<unsigned char>(c)];
}

CorpusFormat corpus_format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == "csv") return CorpusFormat::csv;
  if (ext == "fa" || ext == "fasta" || ext == "fna") return CorpusFormat::fasta;
  throw ConfigError("cannot infer corpus format from '" + path + "' (use .csv or .fasta)");
}

std::vector<TimeCohort> parse_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");

  std::vector<RawRecord> raw =
      format == CorpusFormat::csv ? parse_csv(in, path) : parse_fasta(in, path);
  if (raw.empty()) throw DataError(path + ": no records");

  const std::size_t ref_len = raw.front().rec.residues.size();
  std::string offenders;
  std::size_t offender_count = 0;
  for (const auto& r : raw) {
    if (r.rec.residues.size() != ref_len) {
      ++offender_count;
      if (offender_count <= 8) {
        offenders += offenders.empty() ? "" : ", ";
        offenders += r.rec.id + " (length " + std::to_string(r.rec.residues.size()) + ")";
      }
    }
  }
  if (offender_count > 0) {
    if (offender_count > 8)
      offenders += ", +" + std::to_string(offender_count - 8) + " more";
    throw DataError(path + ": inconsistent sequence lengths, expected " +
                    std::to_string(ref_len) + ": " + offenders);
  }

  std::map<long long, std::vector<SequenceRecord>> by_time;
  for (auto& r : raw) by_time[r.rec.time_index].push_back(std::move(r.rec));

  std::vector<TimeCohort> cohorts;
  cohorts.reserve(by_time.size());
  for (auto& [t, recs] : by_time) cohorts.push_back({t, std::move(recs)});
  return cohorts;
}

char sanitize_residue(char symbol, std::mt19937_64& rng) {
  if (is_canonical_residue(symbol)) return symbol;
  switch (symbol) {
    case 'B': return "DN"[uniform_index(rng, 2)];
    case 'Z': return "EQ"[uniform_index(rng, 2)];
    case 'J': return "IL"[uniform_index(rng, 2)];
    case 'X': return kCanonicalResidues[uniform_index(rng, kCanonicalCount)];
    default:
      throw DataError(std::string("invalid residue symbol '") + symbol + "'");
  }
}

void sanitize_cohorts(std::vector<TimeCohort>& cohorts, std::uint64_t seed) {
  for (auto& cohort : cohorts) {
    for (std::size_t ri = 0; ri < cohort.records.size(); ++ri) {
      auto rng = substream(seed, "sanitize",
                           {static_cast<std::uint64_t>(cohort.time_index), ri});
      for (char& c : cohort.records[ri].residues) c = sanitize_residue(c, rng);
    }
  }
}

}  // namespace mutadetect

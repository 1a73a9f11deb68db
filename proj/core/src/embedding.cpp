#include "mutadetect/embedding.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "mutadetect/error.hpp"
#include "mutadetect/log.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

void require_canonical_trigram(std::string_view trigram) {
  if (trigram.size() != 3)
    throw ContractError("trigram '" + std::string(trigram) + "' must have 3 letters");
  for (char c : trigram)
    if (!is_canonical_residue(c))
      throw ContractError("trigram '" + std::string(trigram) +
                          "' contains a non-canonical residue");
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(where + ": '" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

std::vector<double> fallback_vector(std::string_view trigram, std::uint64_t seed,
                                    std::size_t dim) {
  require_canonical_trigram(trigram);
  auto rng = substream(seed, "trigram-fallback", {fnv1a64(trigram)});
  std::vector<double> v(dim);
  for (double& x : v) x = uniform_real(rng, -0.5, 0.5);
  return v;
}

TrigramTable::TrigramTable(std::size_t dim, std::uint64_t fallback_seed)
    : dim_(dim), fallback_seed_(fallback_seed) {
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
}

TrigramTable TrigramTable::load(const std::string& path, std::uint64_t fallback_seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding table '" + path + "'");

  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>, StringHash, std::equal_to<>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);

    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      auto tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }
    if (fields.size() < 2)
      throw DataError(where + ": expected a trigram and at least one value");
    if (fields[0].size() != 3)
      throw DataError(where + ": trigram '" + std::string(fields[0]) + "' must have 3 letters");
    if (dim == 0) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      throw DataError(where + ": row has " + std::to_string(fields.size() - 1) +
                      " values, expected " + std::to_string(dim));
    }
    std::vector<double> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = parse_double(fields[i + 1], where);
      if (!std::isfinite(v[i]))
        throw DataError(where + ": non-finite value '" + std::string(fields[i + 1]) + "'");
    }
    std::string key(fields[0]);
    if (auto it = entries.find(key); it != entries.end()) {
      log_warn(where + ": duplicate trigram '" + key + "', keeping the later row");
      it->second = std::move(v);
    } else {
      entries.emplace(std::move(key), std::move(v));
    }
  }
  if (entries.empty()) throw DataError(path + ": empty embedding table");

  TrigramTable table(dim, fallback_seed);
  table.entries_ = std::move(entries);
  return table;
}

void TrigramTable::lookup_into(std::string_view trigram, std::vector<double>& out) const {
  if (auto it = entries_.find(trigram); it != entries_.end()) {
    out = it->second;
    return;
  }
  out = fallback_vector(trigram, fallback_seed_, dim_);
  fallback_count_.fetch_add(1, std::memory_order_relaxed);
}

std::vector<double> TrigramTable::lookup(std::string_view trigram) const {
  std::vector<double> out;
  lookup_into(trigram, out);
  return out;
}

std::size_t min_embeddable_position() { return 2; }

std::size_t max_embeddable_position(std::size_t length) {
  if (length < 5) throw DataError("sequence length " + std::to_string(length) +
                                  " is too short to embed any position");
  return length - 3;
}

std::vector<double> embed_position(const SequenceRecord& record, std::size_t position,
                                   const TrigramTable& table) {
  const std::size_t len = record.residues.size();
  if (len < 5 || position < min_embeddable_position() ||
      position > max_embeddable_position(len))
    throw ContractError("position " + std::to_string(position) +
                        " lacks trigram context in a length-" + std::to_string(len) +
                        " sequence (valid range [2, " +
                        std::to_string(len >= 5 ? len - 3 : 0) + "])");

  std::string_view residues = record.residues;
  std::vector<double> x(table.dim(), 0.0);
  std::vector<double> tri;
  for (std::size_t j = position - 1; j <= position + 1; ++j) {
    table.lookup_into(residues.substr(j - 1, 3), tri);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += tri[i];
  }
  for (double& v : x) v /= 3.0;
  return x;
}

std::vector<double> record_mean_embedding(const SequenceRecord& record,
                                          const TrigramTable& table) {
  const std::size_t len = record.residues.size();
  const std::size_t lo = min_embeddable_position();
  const std::size_t hi = max_embeddable_position(len);
  const double positions = static_cast<double>(hi - lo + 1);

  // Each position averages the trigrams centered at p-1, p, p+1, so the mean
  // over positions is a weighted sum over trigram centers: center j reaches
  // the positions in [j-1, j+1] clipped to [lo, hi].
  std::string_view residues = record.residues;
  std::vector<double> acc(table.dim(), 0.0);
  std::vector<double> tri;
  for (std::size_t j = lo - 1; j <= hi + 1; ++j) {
    const std::size_t plo = std::max(j, lo + 1) - 1;  // max(j-1, lo) without underflow
    const std::size_t phi = std::min(j + 1, hi);
    const double weight = static_cast<double>(phi - plo + 1);
    table.lookup_into(residues.substr(j - 1, 3), tri);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * tri[i];
  }
  for (double& v : acc) v /= 3.0 * positions;
  return acc;
}

}  // namespace mutadetect

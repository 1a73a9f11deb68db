#include "mutadetect/samples_io.hpp"

#include "json.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"

namespace mutadetect {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

void append_split(std::string& out, const char* name,
                  const std::vector<SiteSample>& samples) {
  for (const auto& s : samples) {
    json line;
    line["split"] = name;
    line["position"] = s.position;
    line["label"] = s.label;
    line["window"] = s.window;
    line["chain"] = s.chain_id;
    line["draw"] = s.draw_id;
    line["inputs"] = s.inputs;
    out += line.dump();
    out += '\n';
  }
}

SiteSample sample_from_line(const json& line, const std::string& where) {
  for (auto it = line.begin(); it != line.end(); ++it) {
    const std::string& k = it.key();
    if (k != "split" && k != "position" && k != "label" && k != "window" &&
        k != "chain" && k != "draw" && k != "inputs")
      throw DataError(where + ": unknown key '" + k + "'");
  }
  SiteSample s;
  try {
    s.position = line.at("position").get<std::size_t>();
    s.label = line.at("label").get<int>();
    s.window = line.at("window").get<long long>();
    s.chain_id = line.at("chain").get<std::size_t>();
    s.draw_id = line.at("draw").get<std::size_t>();
    s.inputs = line.at("inputs").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
  if (s.label != 0 && s.label != 1)
    throw DataError(where + ": label must be 0 or 1");
  if (s.inputs.empty()) throw DataError(where + ": sample has no input vectors");
  return s;
}

}  // namespace

std::string samples_file_bytes(const DatasetSplits& splits) {
  json header;
  header["format_version"] = kFormatVersion;
  header["kind"] = "samples";
  header["counts"] = {{"train", splits.train.size()},
                      {"val", splits.val.size()},
                      {"test", splits.test.size()}};
  std::string out = header.dump();
  out += '\n';
  append_split(out, "train", splits.train);
  append_split(out, "val", splits.val);
  append_split(out, "test", splits.test);
  return out;
}

void write_samples_file(const std::string& path, const DatasetSplits& splits) {
  write_file_atomic(path, samples_file_bytes(splits));
}

DatasetSplits read_samples_file(const std::string& path) {
  const std::string text = read_file(path);
  DatasetSplits splits;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;

    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": invalid JSON: " + e.what());
    }
    if (!saw_header) {
      if (!parsed.contains("format_version") ||
          !parsed.at("format_version").is_number_integer() ||
          parsed.at("format_version").get<int>() != kFormatVersion)
        throw DataError(where + ": samples file must start with a format_version " +
                        std::to_string(kFormatVersion) + " header");
      if (parsed.value("kind", "") != "samples")
        throw DataError(where + ": header kind must be 'samples'");
      saw_header = true;
      continue;
    }
    const std::string split = parsed.value("split", "");
    SiteSample s = sample_from_line(parsed, where);
    if (split == "train")
      splits.train.push_back(std::move(s));
    else if (split == "val")
      splits.val.push_back(std::move(s));
    else if (split == "test")
      splits.test.push_back(std::move(s));
    else
      throw DataError(where + ": split must be train, val, or test");
  }
  if (!saw_header) throw DataError(path + ": empty samples file");
  return splits;
}

std::string manifest_bytes(const std::vector<GroupCounts>& groups) {
  json root;
  root["format_version"] = kFormatVersion;
  root["kind"] = "split_manifest";
  json list = json::array();
  std::size_t total = 0, train = 0, val = 0, test = 0;
  for (const auto& g : groups) {
    list.push_back({{"window", g.window},
                    {"total", g.total},
                    {"train", g.train},
                    {"val", g.val},
                    {"test", g.test}});
    total += g.total;
    train += g.train;
    val += g.val;
    test += g.test;
  }
  root["groups"] = std::move(list);
  root["totals"] = {{"total", total}, {"train", train}, {"val", val}, {"test", test}};
  return root.dump(2) + "\n";
}

}  // namespace mutadetect

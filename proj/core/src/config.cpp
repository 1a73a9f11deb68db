#include "mutadetect/config.hpp"

#include <initializer_list>

#include "json.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"

namespace mutadetect {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned())
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t get_size(const json& obj, const char* key, std::size_t def) {
  return static_cast<std::size_t>(get_u64(obj, key, def));
}

double get_double(const json& obj, const char* key, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

void require_positive(std::size_t v, const char* key) {
  if (v == 0) throw ConfigError(std::string("'") + key + "' must be positive");
}

void require_fraction(double v, const char* key) {
  if (v <= 0.0 || v >= 1.0)
    throw ConfigError(std::string("'") + key + "' must lie in (0,1)");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"format_version", "seed", "corpus", "out", "samples", "embedding",
              "dataset", "train", "loss"});
  if (!root.contains("format_version"))
    throw ConfigError("config lacks 'format_version'");
  if (!root.at("format_version").is_number_integer() ||
      root.at("format_version").get<int>() != kFormatVersion)
    throw ConfigError("config format_version must be " + std::to_string(kFormatVersion));

  RunConfig cfg;
  cfg.seed = get_u64(root, "seed", 0);
  cfg.corpus = get_string(root, "corpus", "");
  cfg.out = get_string(root, "out", "out");
  cfg.samples = get_string(root, "samples", "");

  if (root.contains("embedding")) {
    const json& e = root.at("embedding");
    check_keys(e, "embedding", {"table", "dim", "allow_fallback"});
    cfg.embedding.table = get_string(e, "table", "");
    cfg.embedding.dim = get_size(e, "dim", cfg.embedding.dim);
    cfg.embedding.allow_fallback = get_bool(e, "allow_fallback", true);
    require_positive(cfg.embedding.dim, "embedding.dim");
  }

  if (root.contains("dataset")) {
    const json& d = root.at("dataset");
    check_keys(d, "dataset", {"k", "restarts", "draws", "T", "positions", "split"});
    cfg.dataset.k = get_size(d, "k", cfg.dataset.k);
    cfg.dataset.restarts = get_size(d, "restarts", cfg.dataset.restarts);
    cfg.dataset.draws = get_size(d, "draws", cfg.dataset.draws);
    cfg.dataset.T = get_size(d, "T", cfg.dataset.T);
    require_positive(cfg.dataset.k, "dataset.k");
    require_positive(cfg.dataset.restarts, "dataset.restarts");
    require_positive(cfg.dataset.draws, "dataset.draws");
    if (cfg.dataset.T < 2)
      throw ConfigError("'dataset.T' must be at least 2 (attention needs history)");
    if (d.contains("positions")) {
      const json& ps = d.at("positions");
      if (!ps.is_array())
        throw ConfigError("'dataset.positions' must be an array of indices");
      for (const json& p : ps) {
        if (!p.is_number_unsigned())
          throw ConfigError("'dataset.positions' entries must be non-negative integers");
        cfg.dataset.positions.push_back(p.get<std::size_t>());
      }
    }
    if (d.contains("split")) {
      const json& s = d.at("split");
      check_keys(s, "dataset.split",
                 {"train_fraction", "val_fraction_of_train", "per_cohort_cap"});
      cfg.dataset.split.train_fraction =
          get_double(s, "train_fraction", cfg.dataset.split.train_fraction);
      cfg.dataset.split.val_fraction_of_train =
          get_double(s, "val_fraction_of_train", cfg.dataset.split.val_fraction_of_train);
      cfg.dataset.split.per_cohort_cap =
          get_size(s, "per_cohort_cap", cfg.dataset.split.per_cohort_cap);
      require_fraction(cfg.dataset.split.train_fraction, "split.train_fraction");
      require_fraction(cfg.dataset.split.val_fraction_of_train,
                       "split.val_fraction_of_train");
      require_positive(cfg.dataset.split.per_cohort_cap, "split.per_cohort_cap");
    }
  }

  if (root.contains("train")) {
    const json& t = root.at("train");
    check_keys(t, "train",
               {"batch_size", "lr", "epochs", "trials", "hidden", "attention_dim",
                "out_dim", "dropout", "encoder", "d_k", "ffn_hidden"});
    cfg.train.batch_size = get_size(t, "batch_size", cfg.train.batch_size);
    cfg.train.lr = get_double(t, "lr", cfg.train.lr);
    cfg.train.epochs = get_size(t, "epochs", cfg.train.epochs);
    cfg.train.trials = get_size(t, "trials", cfg.train.trials);
    cfg.train.model.hidden = get_size(t, "hidden", cfg.train.model.hidden);
    cfg.train.model.attention_dim =
        get_size(t, "attention_dim", cfg.train.model.attention_dim);
    cfg.train.model.out_dim = get_size(t, "out_dim", cfg.train.model.out_dim);
    cfg.train.model.dropout = get_double(t, "dropout", cfg.train.model.dropout);
    cfg.train.model.d_k = get_size(t, "d_k", cfg.train.model.d_k);
    cfg.train.model.ffn_hidden = get_size(t, "ffn_hidden", cfg.train.model.ffn_hidden);
    const std::string enc = get_string(t, "encoder", "lstm_attention");
    if (enc == "lstm_attention")
      cfg.train.model.encoder = EncoderKind::lstm_attention;
    else if (enc == "transformer")
      cfg.train.model.encoder = EncoderKind::transformer;
    else
      throw ConfigError("'train.encoder' must be 'lstm_attention' or 'transformer'");
    require_positive(cfg.train.batch_size, "train.batch_size");
    require_positive(cfg.train.epochs, "train.epochs");
    require_positive(cfg.train.trials, "train.trials");
    require_positive(cfg.train.model.hidden, "train.hidden");
    require_positive(cfg.train.model.attention_dim, "train.attention_dim");
    require_positive(cfg.train.model.out_dim, "train.out_dim");
    require_positive(cfg.train.model.d_k, "train.d_k");
    require_positive(cfg.train.model.ffn_hidden, "train.ffn_hidden");
    if (cfg.train.lr < 0.0) throw ConfigError("'train.lr' must be non-negative");
    if (cfg.train.model.dropout < 0.0 || cfg.train.model.dropout >= 1.0)
      throw ConfigError("'train.dropout' must lie in [0,1)");
  }

  if (root.contains("loss")) {
    const json& l = root.at("loss");
    check_keys(l, "loss", {"mode", "eta", "lambda", "epsilon", "center"});
    const std::string mode = get_string(l, "mode", "hsc");
    if (mode == "hsc")
      cfg.train.loss.mode = LossMode::hsc;
    else if (mode == "deepsad")
      cfg.train.loss.mode = LossMode::deepsad;
    else
      throw ConfigError("'loss.mode' must be 'hsc' or 'deepsad'");
    cfg.train.loss.eta = get_double(l, "eta", cfg.train.loss.eta);
    cfg.train.loss.lambda = get_double(l, "lambda", cfg.train.loss.lambda);
    cfg.train.loss.epsilon = get_double(l, "epsilon", cfg.train.loss.epsilon);
    if (l.contains("center")) {
      const json& c = l.at("center");
      if (!c.is_array()) throw ConfigError("'loss.center' must be an array");
      for (const json& x : c) {
        if (!x.is_number()) throw ConfigError("'loss.center' entries must be numbers");
        cfg.train.loss.center.push_back(x.get<double>());
      }
    }
    if (cfg.train.loss.eta <= 0.0) throw ConfigError("'loss.eta' must be positive");
    if (cfg.train.loss.lambda < 0.0)
      throw ConfigError("'loss.lambda' must be non-negative");
    if (cfg.train.loss.epsilon <= 0.0 || cfg.train.loss.epsilon > 1e-2)
      throw ConfigError("'loss.epsilon' must lie in (0, 1e-2]");
  }

  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  try {
    return parse_run_config(read_file(path));
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

std::string dump_run_config(const RunConfig& cfg) {
  json root;
  root["format_version"] = kFormatVersion;
  root["seed"] = cfg.seed;
  root["corpus"] = cfg.corpus;
  root["out"] = cfg.out;
  root["samples"] = cfg.samples;
  root["embedding"] = {{"table", cfg.embedding.table},
                       {"dim", cfg.embedding.dim},
                       {"allow_fallback", cfg.embedding.allow_fallback}};
  root["dataset"] = {
      {"k", cfg.dataset.k},
      {"restarts", cfg.dataset.restarts},
      {"draws", cfg.dataset.draws},
      {"T", cfg.dataset.T},
      {"positions", cfg.dataset.positions},
      {"split",
       {{"train_fraction", cfg.dataset.split.train_fraction},
        {"val_fraction_of_train", cfg.dataset.split.val_fraction_of_train},
        {"per_cohort_cap", cfg.dataset.split.per_cohort_cap}}}};
  root["train"] = {
      {"batch_size", cfg.train.batch_size},
      {"lr", cfg.train.lr},
      {"epochs", cfg.train.epochs},
      {"trials", cfg.train.trials},
      {"hidden", cfg.train.model.hidden},
      {"attention_dim", cfg.train.model.attention_dim},
      {"out_dim", cfg.train.model.out_dim},
      {"dropout", cfg.train.model.dropout},
      {"encoder", cfg.train.model.encoder == EncoderKind::lstm_attention
                      ? "lstm_attention"
                      : "transformer"},
      {"d_k", cfg.train.model.d_k},
      {"ffn_hidden", cfg.train.model.ffn_hidden}};
  json loss = {{"mode", cfg.train.loss.mode == LossMode::hsc ? "hsc" : "deepsad"},
               {"eta", cfg.train.loss.eta},
               {"lambda", cfg.train.loss.lambda},
               {"epsilon", cfg.train.loss.epsilon}};
  if (!cfg.train.loss.center.empty()) loss["center"] = cfg.train.loss.center;
  root["loss"] = std::move(loss);
  return root.dump(2) + "\n";
}

}  // namespace mutadetect

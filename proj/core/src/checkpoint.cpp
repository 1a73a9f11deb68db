#include "mutadetect/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "mutadetect/error.hpp"
#include "mutadetect/io.hpp"

namespace mutadetect {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

constexpr char kMagic[6] = {'M', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::json;

template <typename T>
void append_raw(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw DataError("truncated checkpoint");
  }
  template <typename T>
  T take() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
  }
  std::string take_bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

std::string encoder_name(EncoderKind k) {
  return k == EncoderKind::lstm_attention ? "lstm_attention" : "transformer";
}

EncoderKind encoder_from_name(const std::string& s) {
  if (s == "lstm_attention") return EncoderKind::lstm_attention;
  if (s == "transformer") return EncoderKind::transformer;
  throw DataError("checkpoint names unknown encoder '" + s + "'");
}

std::string loss_name(LossMode m) { return m == LossMode::hsc ? "hsc" : "deepsad"; }

LossMode loss_from_name(const std::string& s) {
  if (s == "hsc") return LossMode::hsc;
  if (s == "deepsad") return LossMode::deepsad;
  throw DataError("checkpoint names unknown loss mode '" + s + "'");
}

}  // namespace

std::string checkpoint_bytes(const Checkpoint& ck) {
  json meta;
  meta["format_version"] = kVersion;
  const ModelHyper& h = ck.params.hyper;
  meta["encoder"] = encoder_name(h.encoder);
  meta["input_dim"] = h.input_dim;
  meta["hidden"] = h.hidden;
  meta["attention_dim"] = h.attention_dim;
  meta["out_dim"] = h.out_dim;
  meta["d_k"] = h.d_k;
  meta["ffn_hidden"] = h.ffn_hidden;
  meta["dropout"] = h.dropout;
  meta["loss_mode"] = loss_name(ck.loss.mode);
  meta["eta"] = ck.loss.eta;
  meta["lambda"] = ck.loss.lambda;
  meta["epsilon"] = ck.loss.epsilon;
  if (ck.has_threshold)
    meta["threshold"] = ck.threshold;
  else
    meta["threshold"] = nullptr;
  const std::string meta_str = meta.dump();

  auto tensors = ck.params.named_tensors();
  if (!ck.loss.center.empty()) {
    Tensor c = Tensor::from({1, ck.loss.center.size()},
                            std::vector<double>(ck.loss.center));
    tensors.emplace_back("center", c);
  }

  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  append_raw<std::uint32_t>(buf, kVersion);
  append_raw<std::uint64_t>(buf, meta_str.size());
  buf += meta_str;
  append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(name.size()));
    buf += name;
    append_raw<std::uint32_t>(buf, static_cast<std::uint32_t>(t.shape().size()));
    for (std::size_t d : t.shape()) append_raw<std::uint64_t>(buf, d);
    const char* data = reinterpret_cast<const char*>(t.data());
    buf.append(data, t.size() * sizeof(double));
  }
  return buf;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_file_atomic(path, checkpoint_bytes(ck));
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string buf = read_file(path);
  Cursor cur{buf};
  if (cur.take_bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    throw DataError("'" + path + "' is not a checkpoint file");
  const auto version = cur.take<std::uint32_t>();
  if (version != kVersion)
    throw DataError("checkpoint version " + std::to_string(version) +
                    " unsupported (this build reads version " +
                    std::to_string(kVersion) + ")");

  const auto meta_len = cur.take<std::uint64_t>();
  json meta;
  try {
    meta = json::parse(cur.take_bytes(meta_len));
  } catch (const json::exception& e) {
    throw DataError("checkpoint metadata is not valid JSON: " + std::string(e.what()));
  }

  ModelHyper h;
  h.encoder = encoder_from_name(meta.at("encoder").get<std::string>());
  h.input_dim = meta.at("input_dim").get<std::size_t>();
  h.hidden = meta.at("hidden").get<std::size_t>();
  h.attention_dim = meta.at("attention_dim").get<std::size_t>();
  h.out_dim = meta.at("out_dim").get<std::size_t>();
  h.d_k = meta.at("d_k").get<std::size_t>();
  h.ffn_hidden = meta.at("ffn_hidden").get<std::size_t>();
  h.dropout = meta.at("dropout").get<double>();

  Checkpoint ck;
  ck.params = init_params(h, 0);
  ck.loss.mode = loss_from_name(meta.at("loss_mode").get<std::string>());
  ck.loss.eta = meta.at("eta").get<double>();
  ck.loss.lambda = meta.at("lambda").get<double>();
  ck.loss.epsilon = meta.at("epsilon").get<double>();
  if (!meta.at("threshold").is_null()) {
    ck.threshold = meta.at("threshold").get<double>();
    ck.has_threshold = true;
  }

  struct Stored {
    std::vector<std::size_t> shape;
    std::vector<double> values;
  };
  std::unordered_map<std::string, Stored> stored;
  const auto count = cur.take<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = cur.take<std::uint32_t>();
    std::string name = cur.take_bytes(name_len);
    const auto rank = cur.take<std::uint32_t>();
    Stored s;
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      s.shape.push_back(static_cast<std::size_t>(cur.take<std::uint64_t>()));
      n *= s.shape.back();
    }
    s.values.resize(n);
    cur.need(n * sizeof(double));
    std::memcpy(s.values.data(), buf.data() + cur.pos, n * sizeof(double));
    cur.pos += n * sizeof(double);
    stored.emplace(std::move(name), std::move(s));
  }

  for (auto& [name, tensor] : ck.params.named_tensors()) {
    auto it = stored.find(name);
    if (it == stored.end())
      throw DataError("checkpoint is missing tensor '" + name + "'");
    if (it->second.shape != tensor.shape())
      throw DataError("checkpoint tensor '" + name + "' has shape " +
                      shape_to_string(it->second.shape) + ", model expects " +
                      tensor.shape_str());
    Tensor dst = tensor;
    std::memcpy(dst.data(), it->second.values.data(),
                it->second.values.size() * sizeof(double));
    stored.erase(it);
  }
  if (auto it = stored.find("center"); it != stored.end()) {
    ck.loss.center = std::move(it->second.values);
    stored.erase(it);
  }
  if (!stored.empty())
    throw DataError("checkpoint carries unexpected tensor '" + stored.begin()->first + "'");
  return ck;
}

}  // namespace mutadetect

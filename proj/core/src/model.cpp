#include "mutadetect/model.hpp"

#include <cmath>
#include <string>

#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

Tensor init_weight(std::vector<std::size_t> shape, std::size_t fan_in,
                   std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  std::vector<double> vals(n);
  for (double& x : vals) x = uniform_real(rng, -bound, bound);
  return Tensor::from(std::move(shape), std::move(vals), true);
}

Tensor init_bias(std::size_t n, double fill) {
  return Tensor::from({1, n}, std::vector<double>(n, fill), true);
}

}  // namespace

std::vector<Tensor> ModelParams::trainable() {
  std::vector<Tensor> out;
  if (hyper.encoder == EncoderKind::lstm_attention) {
    out = {W_f, W_i, W_o, W_s, b_f, b_i, b_o, b_s,
           v, W_e, b_e, W_hhat, b_hhat, W_phi, b_phi};
  } else {
    out = {W_q, W_k, W_v, ffn_W1, ffn_b1, ffn_W2, ffn_b2, W_phi, b_phi};
  }
  return out;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_tensors() const {
  if (hyper.encoder == EncoderKind::lstm_attention) {
    return {{"W_f", W_f},       {"W_i", W_i},   {"W_o", W_o},   {"W_s", W_s},
            {"b_f", b_f},       {"b_i", b_i},   {"b_o", b_o},   {"b_s", b_s},
            {"v", v},           {"W_e", W_e},   {"b_e", b_e},   {"W_hhat", W_hhat},
            {"b_hhat", b_hhat}, {"W_phi", W_phi}, {"b_phi", b_phi}};
  }
  return {{"W_q", W_q},         {"W_k", W_k},     {"W_v", W_v},
          {"ffn_W1", ffn_W1},   {"ffn_b1", ffn_b1}, {"ffn_W2", ffn_W2},
          {"ffn_b2", ffn_b2},   {"W_phi", W_phi},   {"b_phi", b_phi}};
}

ModelParams init_params(const ModelHyper& hyper, std::uint64_t seed) {
  if (hyper.input_dim == 0 || hyper.hidden == 0 || hyper.out_dim == 0)
    throw ConfigError("model dimensions must be positive");
  if (hyper.dropout < 0.0 || hyper.dropout >= 1.0)
    throw ConfigError("dropout must lie in [0,1)");

  ModelParams p;
  p.hyper = hyper;
  auto rng = substream(seed, "init");
  const std::size_t H = hyper.hidden, D = hyper.input_dim;

  if (hyper.encoder == EncoderKind::lstm_attention) {
    if (hyper.attention_dim == 0) throw ConfigError("attention_dim must be positive");
    p.W_f = init_weight({H, H + D}, H + D, rng);
    p.W_i = init_weight({H, H + D}, H + D, rng);
    p.W_o = init_weight({H, H + D}, H + D, rng);
    p.W_s = init_weight({H, H + D}, H + D, rng);
    p.b_f = init_bias(H, 1.0);
    p.b_i = init_bias(H, 0.0);
    p.b_o = init_bias(H, 0.0);
    p.b_s = init_bias(H, 0.0);
    const std::size_t A = hyper.attention_dim;
    p.v = init_weight({A, 1}, A, rng);
    p.W_e = init_weight({A, 2 * H}, 2 * H, rng);
    p.b_e = init_bias(A, 0.0);
    p.W_hhat = init_weight({H, 2 * H}, 2 * H, rng);
    p.b_hhat = init_bias(H, 0.0);
    p.W_phi = init_weight({hyper.out_dim, H}, H, rng);
    p.b_phi = init_bias(hyper.out_dim, 0.0);
  } else {
    if (hyper.d_k == 0 || hyper.ffn_hidden == 0)
      throw ConfigError("transformer dimensions must be positive");
    const std::size_t K = hyper.d_k, F = hyper.ffn_hidden;
    p.W_q = init_weight({K, D}, D, rng);
    p.W_k = init_weight({K, D}, D, rng);
    p.W_v = init_weight({K, D}, D, rng);
    p.ffn_W1 = init_weight({F, K}, K, rng);
    p.ffn_b1 = init_bias(F, 0.0);
    p.ffn_W2 = init_weight({D, F}, F, rng);
    p.ffn_b2 = init_bias(D, 0.0);
    p.W_phi = init_weight({hyper.out_dim, D}, D, rng);
    p.b_phi = init_bias(hyper.out_dim, 0.0);
  }
  return p;
}

LstmStep lstm_step(Tape& tape, const Tensor& h_prev, const Tensor& s_prev,
                   const Tensor& x_t, const ModelParams& p) {
  Tensor hx = tape.concat_cols({h_prev, x_t});
  LstmStep st;
  st.f = tape.sigmoid(tape.add(tape.matmul(hx, tape.transpose(p.W_f)), p.b_f));
  st.i = tape.sigmoid(tape.add(tape.matmul(hx, tape.transpose(p.W_i)), p.b_i));
  st.o = tape.sigmoid(tape.add(tape.matmul(hx, tape.transpose(p.W_o)), p.b_o));
  st.g = tape.tanh(tape.add(tape.matmul(hx, tape.transpose(p.W_s)), p.b_s));
  st.s = tape.add(tape.mul(st.f, s_prev), tape.mul(st.i, st.g));
  st.h = tape.mul(st.o, tape.tanh(st.s));
  return st;
}

Tensor attention_score(Tape& tape, const Tensor& s_ref, const Tensor& h_i,
                       const ModelParams& p) {
  Tensor cat = tape.concat_cols({s_ref, h_i});
  Tensor u = tape.tanh(tape.add(tape.matmul(cat, tape.transpose(p.W_e)), p.b_e));
  return tape.matmul(u, p.v);
}

EncodeResult encode(Tape& tape, const std::vector<Tensor>& xs, const ModelParams& p,
                    bool training, std::mt19937_64* dropout_rng) {
  const std::size_t T = xs.size();
  if (T < 2)
    throw ContractError("encode needs T >= 2 steps, got " + std::to_string(T));
  if (training && dropout_rng == nullptr)
    throw ContractError("encode in training mode needs a dropout rng");

  const std::size_t B = xs[0].rows(), H = p.hyper.hidden;
  Tensor h = Tensor::zeros({B, H});
  Tensor s = Tensor::zeros({B, H});
  std::vector<Tensor> hs;
  hs.reserve(T);
  Tensor s_att;
  for (std::size_t t = 0; t < T; ++t) {
    LstmStep st = lstm_step(tape, h, s, xs[t], p);
    h = st.h;
    s = st.s;
    hs.push_back(st.h);
    if (t + 2 == T) s_att = st.s;  // cell state entering the final step
  }

  std::vector<Tensor> scores;
  scores.reserve(T - 1);
  for (std::size_t i = 0; i + 1 < T; ++i)
    scores.push_back(attention_score(tape, s_att, hs[i], p));
  Tensor w = tape.softmax_rows(tape.concat_cols(scores));

  Tensor c;
  for (std::size_t i = 0; i + 1 < T; ++i) {
    Tensor term = tape.mul(hs[i], tape.slice_cols(w, i, i + 1));
    c = i == 0 ? term : tape.add(c, term);
  }

  Tensor cat = tape.concat_cols({c, hs[T - 1]});
  Tensor hhat = tape.tanh(tape.add(tape.matmul(cat, tape.transpose(p.W_hhat)), p.b_hhat));
  if (training)
    hhat = tape.dropout(hhat, p.hyper.dropout, *dropout_rng, true);
  return {hhat, w};
}

Tensor project(Tape& tape, const Tensor& hhat, const ModelParams& p) {
  return tape.add(tape.matmul(hhat, tape.transpose(p.W_phi)), p.b_phi);
}

Tensor transformer_encode(Tape& tape, const std::vector<Tensor>& xs,
                          const ModelParams& p) {
  const std::size_t T = xs.size();
  if (T == 0) throw ContractError("transformer_encode needs at least one step");
  const std::size_t K = p.hyper.d_k;

  Tensor Wq_t = tape.transpose(p.W_q);
  Tensor Wk_t = tape.transpose(p.W_k);
  Tensor Wv_t = tape.transpose(p.W_v);
  Tensor W1_t = tape.transpose(p.ffn_W1);
  Tensor W2_t = tape.transpose(p.ffn_W2);

  std::vector<Tensor> q(T), k(T), vv(T);
  for (std::size_t i = 0; i < T; ++i) {
    q[i] = tape.matmul(xs[i], Wq_t);
    k[i] = tape.matmul(xs[i], Wk_t);
    vv[i] = tape.matmul(xs[i], Wv_t);
  }

  // Per-sample dot products q_i.k_j via a ones column contraction.
  Tensor ones = Tensor::from({K, 1}, std::vector<double>(K, 1.0));
  const double scale = 1.0 / std::sqrt(static_cast<double>(K));

  Tensor pooled;
  for (std::size_t i = 0; i < T; ++i) {
    std::vector<Tensor> scores(T);
    for (std::size_t j = 0; j < T; ++j)
      scores[j] = tape.matmul(tape.mul(q[i], k[j]), ones);
    Tensor w = tape.softmax_rows(tape.mul_scalar(tape.concat_cols(scores), scale));

    Tensor attn;
    for (std::size_t j = 0; j < T; ++j) {
      Tensor term = tape.mul(vv[j], tape.slice_cols(w, j, j + 1));
      attn = j == 0 ? term : tape.add(attn, term);
    }

    Tensor a1 = tape.clamp_min(tape.add(tape.matmul(attn, W1_t), p.ffn_b1), 0.0);
    Tensor f = tape.add(tape.matmul(a1, W2_t), p.ffn_b2);
    Tensor z = tape.add(xs[i], f);
    pooled = i == 0 ? z : tape.add(pooled, z);
  }
  return tape.mul_scalar(pooled, 1.0 / static_cast<double>(T));
}

Tensor encode_any(Tape& tape, const std::vector<Tensor>& xs, const ModelParams& p,
                  bool training, std::mt19937_64* dropout_rng) {
  if (p.hyper.encoder == EncoderKind::lstm_attention)
    return encode(tape, xs, p, training, dropout_rng).hhat;
  return transformer_encode(tape, xs, p);
}

}  // namespace mutadetect

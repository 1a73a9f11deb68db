#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mutadetect/tape.hpp"
#include "mutadetect/tensor.hpp"

namespace mutadetect {

enum class EncoderKind { lstm_attention, transformer };

struct ModelHyper {
  EncoderKind encoder = EncoderKind::lstm_attention;
  std::size_t input_dim = 100;
  std::size_t hidden = 128;
  std::size_t attention_dim = 64;
  std::size_t out_dim = 32;
  std::size_t d_k = 64;        // transformer query/key/value width
  std::size_t ffn_hidden = 128;
  double dropout = 0.5;
};

// All learnable weights for one encoder mode. Gate matrices act on the
// concatenation [h_{t-1}; x_t], so their shape is hidden x (hidden+input).
// Only the active encoder's tensors are defined; trainable() returns them in
// a fixed order (the order of initialization draws and checkpoint layout).
struct ModelParams {
  ModelHyper hyper;

  Tensor W_f, W_i, W_o, W_s;  // hidden x (hidden + input_dim)
  Tensor b_f, b_i, b_o, b_s;  // 1 x hidden

  Tensor v;        // attention_dim x 1
  Tensor W_e;      // attention_dim x (2*hidden)
  Tensor b_e;      // 1 x attention_dim
  Tensor W_hhat;   // hidden x (2*hidden)
  Tensor b_hhat;   // 1 x hidden

  Tensor W_phi;    // out_dim x hidden (lstm) or out_dim x input_dim (transformer)
  Tensor b_phi;    // 1 x out_dim

  Tensor W_q, W_k, W_v;      // d_k x input_dim
  Tensor ffn_W1;             // ffn_hidden x d_k
  Tensor ffn_b1;             // 1 x ffn_hidden
  Tensor ffn_W2;             // input_dim x ffn_hidden
  Tensor ffn_b2;             // 1 x input_dim

  std::vector<Tensor> trainable();
  std::vector<std::pair<std::string, Tensor>> named_tensors() const;
};

// Weights ~ uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), biases 0, forget-gate
// bias +1. Draws come from one sub-stream in trainable() order.
ModelParams init_params(const ModelHyper& hyper, std::uint64_t seed);

// One LSTM cell update over a batch of row vectors:
//   f = sigma(W_f [h;x] + b_f)      i = sigma(W_i [h;x] + b_i)
//   o = sigma(W_o [h;x] + b_o)      g = tanh(W_s [h;x] + b_s)
//   s = f*s_prev + i*g              h = o*tanh(s)
// Gates are returned so tests can pin their values directly.
struct LstmStep {
  Tensor h, s;
  Tensor f, i, o, g;
};
LstmStep lstm_step(Tape& tape, const Tensor& h_prev, const Tensor& s_prev,
                   const Tensor& x_t, const ModelParams& p);

// e = v^T tanh(W_e [s_ref; h_i] + b_e), one score per batch row -> (B,1).
Tensor attention_score(Tape& tape, const Tensor& s_ref, const Tensor& h_i,
                       const ModelParams& p);

// Runs the LSTM over xs (T tensors of shape B x input_dim, T >= 2), attends
// over h_1..h_{T-1} with scores conditioned on s_{T-1}, and returns
// hhat = tanh(W_hhat [c; h_T] + b_hhat) with dropout applied in training
// mode. attention holds the softmax weights (B x T-1).
struct EncodeResult {
  Tensor hhat;
  Tensor attention;
};
EncodeResult encode(Tape& tape, const std::vector<Tensor>& xs, const ModelParams& p,
                    bool training = false, std::mt19937_64* dropout_rng = nullptr);

// phi = W_phi hhat + b_phi -> (B, out_dim).
Tensor project(Tape& tape, const Tensor& hhat, const ModelParams& p);

// Single-layer single-head self-attention ablation: scores q_i.k_j/sqrt(d_k),
// softmax per query, values aggregated, then a two-layer feed-forward
// (relu hidden) whose output adds back onto x_i; positions mean-pooled.
Tensor transformer_encode(Tape& tape, const std::vector<Tensor>& xs,
                          const ModelParams& p);

// Dispatch on hyper.encoder; output feeds project() in both modes.
Tensor encode_any(Tape& tape, const std::vector<Tensor>& xs, const ModelParams& p,
                  bool training = false, std::mt19937_64* dropout_rng = nullptr);

}  // namespace mutadetect

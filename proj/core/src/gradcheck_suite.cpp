#include "mutadetect/gradcheck_suite.hpp"

#include <cmath>
#include <functional>
#include <utility>

#include "mutadetect/grad_check.hpp"
#include "mutadetect/loss.hpp"
#include "mutadetect/model.hpp"
#include "mutadetect/rng.hpp"
#include "mutadetect/tape.hpp"
#include "mutadetect/tensor.hpp"

namespace mutadetect {

namespace {

constexpr double kPrimitiveTol = 1e-5;
constexpr double kModelTol = 1e-3;
constexpr double kEps = 1e-6;

Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> shape,
                     double lo = -1.5, double hi = 1.5) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  std::vector<double> vals(n);
  for (double& v : vals) v = uniform_real(rng, lo, hi);
  return Tensor::from(std::move(shape), std::move(vals));
}

// Entries bounded away from zero so 1/x, log and sqrt stay smooth within the
// finite-difference stencil.
Tensor random_signed_away_from_zero(std::mt19937_64& rng,
                                    std::vector<std::size_t> shape) {
  Tensor t = random_tensor(rng, std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = t.at(i);
    t.at(i) = (v < 0.0 ? -1.0 : 1.0) * (std::abs(v) + 0.25);
  }
  return t;
}

Tensor random_positive(std::mt19937_64& rng, std::vector<std::size_t> shape) {
  Tensor t = random_tensor(rng, std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = std::abs(t.at(i)) + 0.25;
  return t;
}

// Random cotangent: reduces a matrix output to a scalar so grad_check can
// drive it, exercising the adjoint with a non-trivial upstream gradient.
Tensor contract(Tape& tape, const Tensor& out, const Tensor& w) {
  return tape.sum(tape.mul(out, w));
}

using PointFn = std::function<std::pair<Tensor, TensorFn>(std::mt19937_64&)>;

void run_case(std::vector<GradCheckCase>& out, std::mt19937_64& rng,
              const std::string& name, double tol, const PointFn& make,
              std::size_t points = 10) {
  GradCheckCase c;
  c.name = name;
  c.tolerance = tol;
  for (std::size_t i = 0; i < points; ++i) {
    auto [point, fn] = make(rng);
    double err = grad_check(fn, point, kEps);
    if (err > c.max_rel_err) c.max_rel_err = err;
  }
  c.pass = c.max_rel_err < tol;
  out.push_back(std::move(c));
}

void primitive_cases(std::vector<GradCheckCase>& out, std::mt19937_64& rng) {
  run_case(out, rng, "matmul(lhs)", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor b = random_tensor(r, {4, 2});
    Tensor w = random_tensor(r, {3, 2});
    TensorFn f = [b, w](Tape& t, const Tensor& x) {
      return contract(t, t.matmul(x, b), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "matmul(rhs)", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor a = random_tensor(r, {3, 4});
    Tensor w = random_tensor(r, {3, 2});
    TensorFn f = [a, w](Tape& t, const Tensor& x) {
      return contract(t, t.matmul(a, x), w);
    };
    return std::make_pair(random_tensor(r, {4, 2}), f);
  });
  run_case(out, rng, "transpose", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {4, 3});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.transpose(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "add", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor b = random_tensor(r, {3, 4});
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [b, w](Tape& t, const Tensor& x) {
      return contract(t, t.add(x, b), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "add(row broadcast, lhs)", kPrimitiveTol,
           [](std::mt19937_64& r) {
             Tensor row = random_tensor(r, {1, 4});
             Tensor w = random_tensor(r, {3, 4});
             TensorFn f = [row, w](Tape& t, const Tensor& x) {
               return contract(t, t.add(x, row), w);
             };
             return std::make_pair(random_tensor(r, {3, 4}), f);
           });
  run_case(out, rng, "add(row broadcast, row)", kPrimitiveTol,
           [](std::mt19937_64& r) {
             Tensor a = random_tensor(r, {3, 4});
             Tensor w = random_tensor(r, {3, 4});
             TensorFn f = [a, w](Tape& t, const Tensor& x) {
               return contract(t, t.add(a, x), w);
             };
             return std::make_pair(random_tensor(r, {1, 4}), f);
           });
  run_case(out, rng, "mul", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor b = random_tensor(r, {3, 4});
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [b, w](Tape& t, const Tensor& x) {
      return contract(t, t.mul(x, b), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "mul(column broadcast, matrix)", kPrimitiveTol,
           [](std::mt19937_64& r) {
             Tensor col = random_tensor(r, {3, 1});
             Tensor w = random_tensor(r, {3, 4});
             TensorFn f = [col, w](Tape& t, const Tensor& x) {
               return contract(t, t.mul(x, col), w);
             };
             return std::make_pair(random_tensor(r, {3, 4}), f);
           });
  run_case(out, rng, "mul(column broadcast, column)", kPrimitiveTol,
           [](std::mt19937_64& r) {
             Tensor a = random_tensor(r, {3, 4});
             Tensor w = random_tensor(r, {3, 4});
             TensorFn f = [a, w](Tape& t, const Tensor& x) {
               return contract(t, t.mul(a, x), w);
             };
             return std::make_pair(random_tensor(r, {3, 1}), f);
           });
  run_case(out, rng, "add_scalar", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.add_scalar(x, 0.7), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "mul_scalar", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.mul_scalar(x, -1.3), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "concat_cols", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor other = random_tensor(r, {3, 2});
    Tensor w = random_tensor(r, {3, 6});
    TensorFn f = [other, w](Tape& t, const Tensor& x) {
      return contract(t, t.concat_cols({other, x, other}), w);
    };
    return std::make_pair(random_tensor(r, {3, 2}), f);
  });
  run_case(out, rng, "concat_rows", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor other = random_tensor(r, {2, 4});
    Tensor w = random_tensor(r, {5, 4});
    TensorFn f = [other, w](Tape& t, const Tensor& x) {
      return contract(t, t.concat_rows({x, other}), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "slice_cols", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 2});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.slice_cols(x, 1, 3), w);
    };
    return std::make_pair(random_tensor(r, {3, 5}), f);
  });
  run_case(out, rng, "sigmoid", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.sigmoid(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "tanh", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.tanh(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "exp", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.exp(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "log", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.log(x), w);
    };
    return std::make_pair(random_positive(r, {3, 4}), f);
  });
  run_case(out, rng, "sqrt", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.sqrt(x), w);
    };
    return std::make_pair(random_positive(r, {3, 4}), f);
  });
  run_case(out, rng, "reciprocal", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.reciprocal(x), w);
    };
    return std::make_pair(random_signed_away_from_zero(r, {3, 4}), f);
  });
  // clamp_min is non-differentiable at the threshold; points keep a margin.
  run_case(out, rng, "clamp_min", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.clamp_min(x, 0.0), w);
    };
    return std::make_pair(random_signed_away_from_zero(r, {3, 4}), f);
  });
  run_case(out, rng, "softmax_rows", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.softmax_rows(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "sum", kPrimitiveTol, [](std::mt19937_64& r) {
    TensorFn f = [](Tape& t, const Tensor& x) { return t.sum(x); };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "mean_rows", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {1, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.mean_rows(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "row_sq_norm", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 1});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      return contract(t, t.row_sq_norm(x), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  run_case(out, rng, "sq_norm", kPrimitiveTol, [](std::mt19937_64& r) {
    TensorFn f = [](Tape& t, const Tensor& x) { return t.sq_norm(x); };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
  // The mask must be identical across the stencil evaluations, so the rng is
  // re-seeded inside the closure for every call.
  run_case(out, rng, "dropout(training)", kPrimitiveTol,
           [](std::mt19937_64& r) {
             Tensor w = random_tensor(r, {3, 4});
             std::uint64_t mask_seed = r();
             TensorFn f = [w, mask_seed](Tape& t, const Tensor& x) {
               std::mt19937_64 mask_rng(mask_seed);
               return contract(t, t.dropout(x, 0.5, mask_rng, true), w);
             };
             return std::make_pair(random_tensor(r, {3, 4}), f);
           });
  run_case(out, rng, "dropout(eval)", kPrimitiveTol, [](std::mt19937_64& r) {
    Tensor w = random_tensor(r, {3, 4});
    TensorFn f = [w](Tape& t, const Tensor& x) {
      std::mt19937_64 unused(0);
      return contract(t, t.dropout(x, 0.5, unused, false), w);
    };
    return std::make_pair(random_tensor(r, {3, 4}), f);
  });
}

std::vector<Tensor*> trainable_slots(ModelParams& p) {
  if (p.hyper.encoder == EncoderKind::lstm_attention) {
    return {&p.W_f, &p.W_i, &p.W_o, &p.W_s,   &p.b_f,    &p.b_i,   &p.b_o,
            &p.b_s, &p.v,   &p.W_e, &p.b_e,   &p.W_hhat, &p.b_hhat,
            &p.W_phi, &p.b_phi};
  }
  return {&p.W_q,    &p.W_k,    &p.W_v,   &p.ffn_W1, &p.ffn_b1,
          &p.ffn_W2, &p.ffn_b2, &p.W_phi, &p.b_phi};
}

// Full path check: for each parameter tensor in turn, treat it as the checked
// variable (all other tensors constant) and differentiate the batch loss.
void model_case(std::vector<GradCheckCase>& out, const std::string& name,
                const ModelHyper& hyper, LossMode mode, std::uint64_t seed) {
  const std::size_t B = 2, T = 5;
  std::mt19937_64 rng(splitmix64(seed ^ fnv1a64(name)));

  ModelParams base = init_params(hyper, rng());
  std::vector<Tensor> xs;
  for (std::size_t t = 0; t < T; ++t)
    xs.push_back(random_tensor(rng, {B, hyper.input_dim}, -1.0, 1.0));
  std::vector<int> labels = {1, 0};

  LossConfig loss;
  loss.mode = mode;
  if (mode == LossMode::deepsad) {
    loss.center.assign(hyper.out_dim, 0.0);
    for (double& c : loss.center) c = uniform_real(rng, -1.0, 1.0);
    loss.lambda = 1e-3;
  }

  GradCheckCase c;
  c.name = name;
  c.tolerance = kModelTol;
  const std::size_t n_slots = trainable_slots(base).size();
  for (std::size_t k = 0; k < n_slots; ++k) {
    Tensor point = *trainable_slots(base)[k];
    TensorFn f = [&base, &xs, &labels, &loss, k](Tape& tape, const Tensor& x) {
      ModelParams p = base;
      *trainable_slots(p)[k] = x;
      Tensor hhat = encode_any(tape, xs, p);
      Tensor phi = project(tape, hhat, p);
      return training_loss(tape, phi, labels, p.trainable(), loss);
    };
    double err = grad_check(f, point, kEps);
    if (err > c.max_rel_err) c.max_rel_err = err;
  }
  // Gradient with respect to the inputs as well.
  {
    TensorFn f = [&base, &xs, &labels, &loss](Tape& tape, const Tensor& x) {
      std::vector<Tensor> xs2 = xs;
      xs2[2] = x;
      Tensor hhat = encode_any(tape, xs2, base);
      Tensor phi = project(tape, hhat, base);
      return training_loss(tape, phi, labels, base.trainable(), loss);
    };
    double err = grad_check(f, xs[2], kEps);
    if (err > c.max_rel_err) c.max_rel_err = err;
  }
  c.pass = c.max_rel_err < c.tolerance;
  out.push_back(std::move(c));
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed) {
  std::vector<GradCheckCase> out;
  std::mt19937_64 rng = substream(seed, "gradcheck", {});
  primitive_cases(out, rng);

  ModelHyper lstm;
  lstm.encoder = EncoderKind::lstm_attention;
  lstm.input_dim = 6;
  lstm.hidden = 8;
  lstm.attention_dim = 4;
  lstm.out_dim = 4;
  model_case(out, "lstm+attention+hsc", lstm, LossMode::hsc, seed);
  model_case(out, "lstm+attention+deepsad", lstm, LossMode::deepsad, seed);

  ModelHyper trans;
  trans.encoder = EncoderKind::transformer;
  trans.input_dim = 6;
  trans.d_k = 5;
  trans.ffn_hidden = 7;
  trans.out_dim = 4;
  model_case(out, "transformer+hsc", trans, LossMode::hsc, seed);
  return out;
}

}  // namespace mutadetect

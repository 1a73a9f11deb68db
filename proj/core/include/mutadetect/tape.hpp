#pragma once

#include <functional>
#include <random>
#include <vector>

#include "mutadetect/tensor.hpp"

namespace mutadetect {

// Records forward operations and replays their adjoints in reverse.
// A tape and the tensors flowing through it belong to one worker at a time;
// parameter tensors (requires_grad) outlive the tape and accumulate
// gradients across backward() calls until an optimizer step zeroes them.
//
// Every forward op validates shapes and rejects non-finite outputs, so a
// NaN/Inf anywhere in a model surfaces at the op that produced it.
class Tape {
 public:
  // a: (m,k), b: (k,n) -> (m,n)
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);

  // Same shape, or b a 1xN row broadcast over a's rows.
  Tensor add(const Tensor& a, const Tensor& b);
  // Same shape, or one operand a Bx1 column broadcast across the other's columns.
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor add_scalar(const Tensor& a, double c);
  Tensor mul_scalar(const Tensor& a, double c);

  Tensor concat_cols(const std::vector<Tensor>& xs);
  Tensor concat_rows(const std::vector<Tensor>& xs);
  Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1);

  Tensor sigmoid(const Tensor& a);
  Tensor tanh(const Tensor& a);
  Tensor exp(const Tensor& a);
  Tensor log(const Tensor& a);   // domain error on non-positive entries
  Tensor sqrt(const Tensor& a);  // domain error on negative entries
  Tensor reciprocal(const Tensor& a);
  Tensor clamp_min(const Tensor& a, double m);

  Tensor softmax_rows(const Tensor& a);

  Tensor sum(const Tensor& a);          // -> 1x1
  Tensor mean_rows(const Tensor& a);    // (r,n) -> 1xn
  Tensor row_sq_norm(const Tensor& a);  // (r,n) -> rx1
  Tensor sq_norm(const Tensor& a);      // -> 1x1

  // Training mode zeroes entries with probability p and scales survivors by
  // 1/(1-p); eval mode is the identity.
  Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training);

  // Seeds d(loss)/d(loss)=1, propagates adjoints in reverse order, then
  // clears the tape.
  void backward(const Tensor& loss);

  std::size_t node_count() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    std::function<void()> back;
  };

  Tensor make_output(std::vector<std::size_t> shape);
  void record(std::function<void()> back);
  void check_finite(const Tensor& t, const char* op);

  std::vector<Node> nodes_;
};

}  // namespace mutadetect

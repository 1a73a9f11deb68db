#include "mutadetect/tape.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "mutadetect/error.hpp"
#include "mutadetect/rng.hpp"

namespace mutadetect {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

std::string two_shapes(const Tensor& a, const Tensor& b) {
  return a.shape_str() + " vs " + b.shape_str();
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor Tape::make_output(std::vector<std::size_t> shape) {
  Tensor t = Tensor::zeros(std::move(shape));
  t.grad();  // adjoint buffer, zeroed, ready for the reverse pass
  return t;
}

void Tape::record(std::function<void()> back) { nodes_.push_back({std::move(back)}); }

void Tape::check_finite(const Tensor& t, const char* op) {
  const double* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(p[i])) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  if (k != k2) {
    throw ContractError("matmul dimension mismatch: " + two_shapes(a, b));
  }
  Tensor out = make_output({m, n});
  {
    ConstMapMat am(a.data(), m, k), bm(b.data(), k, n);
    MapMat om(out.data(), m, n);
    om.noalias() = am * bm;
  }
  check_finite(out, "matmul");
  record([a, b, out, m, k, n]() mutable {
    ConstMapMat am(a.data(), m, k), bm(b.data(), k, n);
    ConstMapMat gm(out.grad_view().data(), m, n);
    MapMat ga(a.grad().data(), m, k);
    ga.noalias() += gm * bm.transpose();
    MapMat gb(b.grad().data(), k, n);
    gb.noalias() += am.transpose() * gm;
  });
  return out;
}

Tensor Tape::transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = make_output({n, m});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out.at(c, r) = a.at(r, c);
  record([a, out, m, n]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += g[c * m + r];
  });
  return out;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), n = a.cols();
  const bool same = (b.rows() == m && b.cols() == n);
  const bool row_bcast = (b.rows() == 1 && b.cols() == n && m > 1);
  if (!same && !row_bcast) {
    throw ContractError("add dimension mismatch: " + two_shapes(a, b));
  }
  Tensor out = make_output({m, n});
  const double* ap = a.data();
  const double* bp = b.data();
  double* op = out.data();
  if (same) {
    for (std::size_t i = 0; i < m * n; ++i) op[i] = ap[i] + bp[i];
  } else {
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) op[r * n + c] = ap[r * n + c] + bp[c];
  }
  check_finite(out, "add");
  record([a, b, out, m, n, same]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    auto& gb = b.grad();
    for (std::size_t i = 0; i < m * n; ++i) ga[i] += g[i];
    if (same) {
      for (std::size_t i = 0; i < m * n; ++i) gb[i] += g[i];
    } else {
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
    }
  });
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  // Column broadcast is symmetric; normalize so the Bx1 operand is `col`.
  if (a.rows() == b.rows() && a.cols() == 1 && b.cols() > 1) return mul(b, a);
  const std::size_t m = a.rows(), n = a.cols();
  const bool same = (b.rows() == m && b.cols() == n);
  const bool col_bcast = (b.rows() == m && b.cols() == 1 && n > 1);
  if (!same && !col_bcast) {
    throw ContractError("mul dimension mismatch: " + two_shapes(a, b));
  }
  Tensor out = make_output({m, n});
  const double* ap = a.data();
  const double* bp = b.data();
  double* op = out.data();
  if (same) {
    for (std::size_t i = 0; i < m * n; ++i) op[i] = ap[i] * bp[i];
  } else {
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) op[r * n + c] = ap[r * n + c] * bp[r];
  }
  check_finite(out, "mul");
  record([a, b, out, m, n, same]() mutable {
    const auto& g = out.grad_view();
    const double* ap = a.data();
    const double* bp = b.data();
    auto& ga = a.grad();
    auto& gb = b.grad();
    if (same) {
      for (std::size_t i = 0; i < m * n; ++i) {
        ga[i] += g[i] * bp[i];
        gb[i] += g[i] * ap[i];
      }
    } else {
      for (std::size_t r = 0; r < m; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          ga[r * n + c] += g[r * n + c] * bp[r];
          acc += g[r * n + c] * ap[r * n + c];
        }
        gb[r] += acc;
      }
    }
  });
  return out;
}

Tensor Tape::add_scalar(const Tensor& a, double c) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = a.at(i) + c;
  check_finite(out, "add_scalar");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
  return out;
}

Tensor Tape::mul_scalar(const Tensor& a, double c) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = a.at(i) * c;
  check_finite(out, "mul_scalar");
  record([a, out, c]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * c;
  });
  return out;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ContractError("concat_cols on empty list");
  const std::size_t m = xs[0].rows();
  std::size_t total = 0;
  for (const Tensor& x : xs) {
    if (x.rows() != m) {
      throw ContractError("concat_cols row mismatch: " + two_shapes(xs[0], x));
    }
    total += x.cols();
  }
  Tensor out = make_output({m, total});
  std::size_t off = 0;
  for (const Tensor& x : xs) {
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, off + c) = x.at(r, c);
    off += x.cols();
  }
  record([xs, out, m, total]() mutable {
    const auto& g = out.grad_view();
    std::size_t off = 0;
    for (const Tensor& x : xs) {
      auto& gx = x.grad();
      const std::size_t n = x.cols();
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) gx[r * n + c] += g[r * total + off + c];
      off += n;
    }
  });
  return out;
}

Tensor Tape::concat_rows(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ContractError("concat_rows on empty list");
  const std::size_t n = xs[0].cols();
  std::size_t total = 0;
  for (const Tensor& x : xs) {
    if (x.cols() != n) {
      throw ContractError("concat_rows column mismatch: " + two_shapes(xs[0], x));
    }
    total += x.rows();
  }
  Tensor out = make_output({total, n});
  std::size_t off = 0;
  for (const Tensor& x : xs) {
    for (std::size_t i = 0; i < x.size(); ++i) out.at(off * n + i) = x.at(i);
    off += x.rows();
  }
  record([xs, out, n]() mutable {
    const auto& g = out.grad_view();
    std::size_t off = 0;
    for (const Tensor& x : xs) {
      auto& gx = x.grad();
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[off * n + i];
      off += x.rows();
    }
  });
  return out;
}

Tensor Tape::slice_cols(const Tensor& a, std::size_t c0, std::size_t c1) {
  const std::size_t m = a.rows(), n = a.cols();
  if (c0 >= c1 || c1 > n) {
    throw ContractError("slice_cols [" + std::to_string(c0) + "," + std::to_string(c1) +
                        ") out of range for shape " + a.shape_str());
  }
  const std::size_t w = c1 - c0;
  Tensor out = make_output({m, w});
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < w; ++c) out.at(r, c) = a.at(r, c0 + c);
  record([a, out, m, n, w, c0]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < w; ++c) ga[r * n + c0 + c] += g[r * w + c];
  });
  return out;
}

Tensor Tape::sigmoid(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = stable_sigmoid(a.at(i));
  check_finite(out, "sigmoid");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      double y = out.at(i);
      ga[i] += g[i] * y * (1.0 - y);
    }
  });
  return out;
}

Tensor Tape::tanh(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = std::tanh(a.at(i));
  check_finite(out, "tanh");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      double y = out.at(i);
      ga[i] += g[i] * (1.0 - y * y);
    }
  });
  return out;
}

Tensor Tape::exp(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = std::exp(a.at(i));
  check_finite(out, "exp");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * out.at(i);
  });
  return out;
}

Tensor Tape::log(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at(i) <= 0.0) {
      throw NumericError("log of non-positive value " + std::to_string(a.at(i)));
    }
    out.at(i) = std::log(a.at(i));
  }
  check_finite(out, "log");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] / a.at(i);
  });
  return out;
}

Tensor Tape::sqrt(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at(i) < 0.0) {
      throw NumericError("sqrt of negative value " + std::to_string(a.at(i)));
    }
    out.at(i) = std::sqrt(a.at(i));
  }
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * 0.5 / out.at(i);
  });
  return out;
}

Tensor Tape::reciprocal(const Tensor& a) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at(i) == 0.0) throw NumericError("reciprocal of zero");
    out.at(i) = 1.0 / a.at(i);
  }
  check_finite(out, "reciprocal");
  record([a, out]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      double y = out.at(i);
      ga[i] -= g[i] * y * y;
    }
  });
  return out;
}

Tensor Tape::clamp_min(const Tensor& a, double m) {
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out.at(i) = a.at(i) < m ? m : a.at(i);
  check_finite(out, "clamp_min");
  record([a, out, m]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      if (a.at(i) > m) ga[i] += g[i];
    }
  });
  return out;
}

Tensor Tape::softmax_rows(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = make_output({m, n});
  for (std::size_t r = 0; r < m; ++r) {
    double mx = a.at(r, 0);
    for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, a.at(r, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      double e = std::exp(a.at(r, c) - mx);
      out.at(r, c) = e;
      denom += e;
    }
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) /= denom;
  }
  check_finite(out, "softmax");
  record([a, out, m, n]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t r = 0; r < m; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < n; ++c) dot += g[r * n + c] * out.at(r, c);
      for (std::size_t c = 0; c < n; ++c) {
        ga[r * n + c] += out.at(r, c) * (g[r * n + c] - dot);
      }
    }
  });
  return out;
}

Tensor Tape::sum(const Tensor& a) {
  Tensor out = make_output({1, 1});
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.at(i);
  out.at(0) = acc;
  check_finite(out, "sum");
  record([a, out]() mutable {
    double g = out.grad_view()[0];
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
  return out;
}

Tensor Tape::mean_rows(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = make_output({1, n});
  for (std::size_t c = 0; c < n; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += a.at(r, c);
    out.at(0, c) = acc / static_cast<double>(m);
  }
  check_finite(out, "mean_rows");
  record([a, out, m, n]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += g[c] * inv;
  });
  return out;
}

Tensor Tape::row_sq_norm(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Tensor out = make_output({m, 1});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += a.at(r, c) * a.at(r, c);
    out.at(r, 0) = acc;
  }
  check_finite(out, "row_sq_norm");
  record([a, out, m, n]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += 2.0 * a.at(r, c) * g[r];
  });
  return out;
}

Tensor Tape::sq_norm(const Tensor& a) {
  Tensor out = make_output({1, 1});
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.at(i) * a.at(i);
  out.at(0) = acc;
  check_finite(out, "sq_norm");
  record([a, out]() mutable {
    double g = out.grad_view()[0];
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * a.at(i) * g;
  });
  return out;
}

Tensor Tape::dropout(const Tensor& a, double p, std::mt19937_64& rng, bool training) {
  if (p < 0.0 || p >= 1.0) {
    throw ContractError("dropout probability " + std::to_string(p) + " outside [0,1)");
  }
  if (!training || p == 0.0) return a;
  const double scale = 1.0 / (1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(a.size());
  Tensor out = make_output(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double keep = uniform_unit(rng) >= p ? scale : 0.0;
    (*mask)[i] = keep;
    out.at(i) = a.at(i) * keep;
  }
  check_finite(out, "dropout");
  record([a, out, mask]() mutable {
    const auto& g = out.grad_view();
    auto& ga = a.grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * (*mask)[i];
  });
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward requires a scalar loss tensor");
  }
  Tensor seed = loss;
  seed.grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) it->back();
  clear();
}

}  // namespace mutadetect

// Copyright 2026 The CARAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "carat/nn/graph.hpp"

#include <algorithm>
#include <cmath>

namespace carat::nn {

namespace {
constexpr double kLnEps = 1e-5;  // layernorm variance floor
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::input(Tensor t) {
  Node n;
  n.val = std::move(t);
  return push(std::move(n));
}

int Graph::param(Param& p) {
  Node n;
  n.val = p.value;
  n.needs_grad = true;
  n.bound = &p;
  n.back = [](Graph&, Node& self) {
    for (size_t i = 0; i < self.grad.v.size(); ++i) self.bound->grad.v[i] += self.grad.v[i];
  };
  return push(std::move(n));
}

int Graph::frozen(const Param& p) { return input(p.value); }

// Shared preamble: allocates the output node, marks needs_grad from parents.
#define CARAT_BINARY_PROLOGUE(a, b)                                             \
  Node n;                                                                       \
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;

#define CARAT_UNARY_PROLOGUE(a) \
  Node n;                       \
  n.needs_grad = node(a).needs_grad;

int Graph::add(int a, int b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  require(ta.same_shape(tb), "Graph::add: shape mismatch");
  CARAT_BINARY_PROLOGUE(a, b)
  n.val = ta;
  for (size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] += tb.v[i];
  n.back = [a, b](Graph& g, Node& self) {
    if (g.node(a).needs_grad)
      for (size_t i = 0; i < self.grad.v.size(); ++i) g.node(a).grad.v[i] += self.grad.v[i];
    if (g.node(b).needs_grad)
      for (size_t i = 0; i < self.grad.v.size(); ++i) g.node(b).grad.v[i] += self.grad.v[i];
  };
  return push(std::move(n));
}

int Graph::add_bias(int x, int bias) {
  const Tensor& tx = val(x);
  const Tensor& tb = val(bias);
  require(tb.size() == tx.cols(), "Graph::add_bias: bias length != cols");
  CARAT_BINARY_PROLOGUE(x, bias)
  n.val = tx;
  const int64_t R = tx.rows(), C = tx.cols();
  for (int64_t r = 0; r < R; ++r)
    for (int64_t c = 0; c < C; ++c) n.val.v[static_cast<size_t>(r * C + c)] += tb.v[static_cast<size_t>(c)];
  n.back = [x, bias, R, C](Graph& g, Node& self) {
    if (g.node(x).needs_grad)
      for (size_t i = 0; i < self.grad.v.size(); ++i) g.node(x).grad.v[i] += self.grad.v[i];
    if (g.node(bias).needs_grad)
      for (int64_t r = 0; r < R; ++r)
        for (int64_t c = 0; c < C; ++c)
          g.node(bias).grad.v[static_cast<size_t>(c)] += self.grad.v[static_cast<size_t>(r * C + c)];
  };
  return push(std::move(n));
}

int Graph::mul(int a, int b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  require(ta.same_shape(tb), "Graph::mul: shape mismatch");
  CARAT_BINARY_PROLOGUE(a, b)
  n.val = ta;
  for (size_t i = 0; i < n.val.v.size(); ++i) n.val.v[i] *= tb.v[i];
  n.back = [a, b](Graph& g, Node& self) {
    if (g.node(a).needs_grad)
      for (size_t i = 0; i < self.grad.v.size(); ++i)
        g.node(a).grad.v[i] += self.grad.v[i] * g.node(b).val.v[i];
    if (g.node(b).needs_grad)
      for (size_t i = 0; i < self.grad.v.size(); ++i)
        g.node(b).grad.v[i] += self.grad.v[i] * g.node(a).val.v[i];
  };
  return push(std::move(n));
}

int Graph::scale(int a, double s) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x *= s;
  n.back = [a, s](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i) g.node(a).grad.v[i] += self.grad.v[i] * s;
  };
  return push(std::move(n));
}

int Graph::add_const(int a, double c) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x += c;
  n.back = [a](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i) g.node(a).grad.v[i] += self.grad.v[i];
  };
  return push(std::move(n));
}

int Graph::relu(int a) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
  n.back = [a](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i)
      if (g.node(a).val.v[i] > 0.0) g.node(a).grad.v[i] += self.grad.v[i];
  };
  return push(std::move(n));
}

int Graph::gelu(int a) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
  n.back = [a](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i) {
      const double x = g.node(a).val.v[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      g.node(a).grad.v[i] += self.grad.v[i] * (cdf + x * pdf);
    }
  };
  return push(std::move(n));
}

int Graph::tanh_(int a) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x = std::tanh(x);
  n.back = [a](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i) {
      const double y = self.val.v[i];
      g.node(a).grad.v[i] += self.grad.v[i] * (1.0 - y * y);
    }
  };
  return push(std::move(n));
}

int Graph::sigmoid(int a) {
  CARAT_UNARY_PROLOGUE(a)
  n.val = val(a);
  for (double& x : n.val.v) x = 1.0 / (1.0 + std::exp(-x));
  n.back = [a](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t i = 0; i < self.grad.v.size(); ++i) {
      const double y = self.val.v[i];
      g.node(a).grad.v[i] += self.grad.v[i] * y * (1.0 - y);
    }
  };
  return push(std::move(n));
}

int Graph::matmul(int a, int b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  require(ta.cols() == tb.rows(), "Graph::matmul: inner dims differ");
  CARAT_BINARY_PROLOGUE(a, b)
  const int64_t N = ta.rows(), K = ta.cols(), M = tb.cols();
  n.val = Tensor({N, M});
  // ikj order for cache friendliness
  for (int64_t i = 0; i < N; ++i) {
    const double* arow = &ta.v[static_cast<size_t>(i * K)];
    double* orow = &n.val.v[static_cast<size_t>(i * M)];
    for (int64_t k = 0; k < K; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = &tb.v[static_cast<size_t>(k * M)];
      for (int64_t j = 0; j < M; ++j) orow[j] += av * brow[j];
    }
  }
  n.back = [a, b, N, K, M](Graph& g, Node& self) {
    const Tensor& ga = g.node(a).val;
    const Tensor& gb = g.node(b).val;
    if (g.node(a).needs_grad) {
      // dA = dC * B^T
      for (int64_t i = 0; i < N; ++i) {
        const double* crow = &self.grad.v[static_cast<size_t>(i * M)];
        double* arow = &g.node(a).grad.v[static_cast<size_t>(i * K)];
        for (int64_t k = 0; k < K; ++k) {
          const double* brow = &gb.v[static_cast<size_t>(k * M)];
          double acc = 0.0;
          for (int64_t j = 0; j < M; ++j) acc += crow[j] * brow[j];
          arow[k] += acc;
        }
      }
    }
    if (g.node(b).needs_grad) {
      // dB = A^T * dC
      for (int64_t i = 0; i < N; ++i) {
        const double* arow = &ga.v[static_cast<size_t>(i * K)];
        const double* crow = &self.grad.v[static_cast<size_t>(i * M)];
        for (int64_t k = 0; k < K; ++k) {
          const double av = arow[k];
          if (av == 0.0) continue;
          double* brow = &g.node(b).grad.v[static_cast<size_t>(k * M)];
          for (int64_t j = 0; j < M; ++j) brow[j] += av * crow[j];
        }
      }
    }
  };
  return push(std::move(n));
}

int Graph::concat_cols(int a, int b) {
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  require(ta.rows() == tb.rows(), "Graph::concat_cols: row mismatch");
  CARAT_BINARY_PROLOGUE(a, b)
  const int64_t R = ta.rows(), Ca = ta.cols(), Cb = tb.cols();
  n.val = Tensor({R, Ca + Cb});
  for (int64_t r = 0; r < R; ++r) {
    std::copy_n(&ta.v[static_cast<size_t>(r * Ca)], Ca, &n.val.v[static_cast<size_t>(r * (Ca + Cb))]);
    std::copy_n(&tb.v[static_cast<size_t>(r * Cb)], Cb, &n.val.v[static_cast<size_t>(r * (Ca + Cb) + Ca)]);
  }
  n.back = [a, b, R, Ca, Cb](Graph& g, Node& self) {
    for (int64_t r = 0; r < R; ++r) {
      if (g.node(a).needs_grad)
        for (int64_t c = 0; c < Ca; ++c)
          g.node(a).grad.v[static_cast<size_t>(r * Ca + c)] += self.grad.v[static_cast<size_t>(r * (Ca + Cb) + c)];
      if (g.node(b).needs_grad)
        for (int64_t c = 0; c < Cb; ++c)
          g.node(b).grad.v[static_cast<size_t>(r * Cb + c)] +=
              self.grad.v[static_cast<size_t>(r * (Ca + Cb) + Ca + c)];
    }
  };
  return push(std::move(n));
}

int Graph::slice_cols(int a, int64_t c0, int64_t c1) {
  const Tensor& ta = val(a);
  require(0 <= c0 && c0 < c1 && c1 <= ta.cols(), "Graph::slice_cols: bad range");
  CARAT_UNARY_PROLOGUE(a)
  const int64_t R = ta.rows(), C = ta.cols(), W = c1 - c0;
  n.val = Tensor({R, W});
  for (int64_t r = 0; r < R; ++r)
    std::copy_n(&ta.v[static_cast<size_t>(r * C + c0)], W, &n.val.v[static_cast<size_t>(r * W)]);
  n.back = [a, R, C, c0, W](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (int64_t r = 0; r < R; ++r)
      for (int64_t c = 0; c < W; ++c)
        g.node(a).grad.v[static_cast<size_t>(r * C + c0 + c)] += self.grad.v[static_cast<size_t>(r * W + c)];
  };
  return push(std::move(n));
}

int Graph::concat_rows(const std::vector<int>& parts) {
  require(!parts.empty(), "Graph::concat_rows: empty");
  Node n;
  int64_t R = 0;
  const int64_t C = val(parts[0]).cols();
  for (int p : parts) {
    require(val(p).cols() == C, "Graph::concat_rows: col mismatch");
    R += val(p).rows();
    n.needs_grad = n.needs_grad || node(p).needs_grad;
  }
  n.val = Tensor({R, C});
  int64_t off = 0;
  for (int p : parts) {
    const Tensor& t = val(p);
    std::copy(t.v.begin(), t.v.end(), n.val.v.begin() + static_cast<ptrdiff_t>(off));
    off += t.size();
  }
  std::vector<int> ps = parts;
  n.back = [ps](Graph& g, Node& self) {
    int64_t o = 0;
    for (int p : ps) {
      Node& pn = g.node(p);
      if (pn.needs_grad)
        for (int64_t i = 0; i < pn.val.size(); ++i)
          pn.grad.v[static_cast<size_t>(i)] += self.grad.v[static_cast<size_t>(o + i)];
      o += pn.val.size();
    }
  };
  return push(std::move(n));
}

int Graph::rows(int a, std::vector<int64_t> idx) {
  const Tensor& ta = val(a);
  CARAT_UNARY_PROLOGUE(a)
  const int64_t C = ta.cols();
  n.val = Tensor({static_cast<int64_t>(idx.size()), C});
  for (size_t r = 0; r < idx.size(); ++r) {
    require(idx[r] >= 0 && idx[r] < ta.rows(), "Graph::rows: index out of range");
    std::copy_n(&ta.v[static_cast<size_t>(idx[r] * C)], C, &n.val.v[r * static_cast<size_t>(C)]);
  }
  n.back = [a, idx = std::move(idx), C](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (size_t r = 0; r < idx.size(); ++r)
      for (int64_t c = 0; c < C; ++c)
        g.node(a).grad.v[static_cast<size_t>(idx[r] * C + c)] += self.grad.v[r * static_cast<size_t>(C) + static_cast<size_t>(c)];
  };
  return push(std::move(n));
}

int Graph::sum_groups(int a, int64_t group) {
  const Tensor& ta = val(a);
  require(group > 0 && ta.rows() % group == 0, "Graph::sum_groups: rows not divisible");
  CARAT_UNARY_PROLOGUE(a)
  const int64_t R = ta.rows() / group, C = ta.cols();
  n.val = Tensor({R, C});
  for (int64_t r = 0; r < R; ++r)
    for (int64_t k = 0; k < group; ++k)
      for (int64_t c = 0; c < C; ++c)
        n.val.v[static_cast<size_t>(r * C + c)] += ta.v[static_cast<size_t>((r * group + k) * C + c)];
  n.back = [a, R, C, group](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (int64_t r = 0; r < R; ++r)
      for (int64_t k = 0; k < group; ++k)
        for (int64_t c = 0; c < C; ++c)
          g.node(a).grad.v[static_cast<size_t>((r * group + k) * C + c)] += self.grad.v[static_cast<size_t>(r * C + c)];
  };
  return push(std::move(n));
}

int Graph::row_sum(int a) {
  const Tensor& ta = val(a);
  CARAT_UNARY_PROLOGUE(a)
  const int64_t R = ta.rows(), C = ta.cols();
  n.val = Tensor({R, 1});
  for (int64_t r = 0; r < R; ++r) {
    double acc = 0.0;
    for (int64_t c = 0; c < C; ++c) acc += ta.v[static_cast<size_t>(r * C + c)];
    n.val.v[static_cast<size_t>(r)] = acc;
  }
  n.back = [a, R, C](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    for (int64_t r = 0; r < R; ++r)
      for (int64_t c = 0; c < C; ++c)
        g.node(a).grad.v[static_cast<size_t>(r * C + c)] += self.grad.v[static_cast<size_t>(r)];
  };
  return push(std::move(n));
}

int Graph::mean_all(int a) {
  const Tensor& ta = val(a);
  CARAT_UNARY_PROLOGUE(a)
  const double inv = 1.0 / static_cast<double>(ta.size());
  n.val = Tensor({1});
  double acc = 0.0;
  for (double x : ta.v) acc += x;
  n.val.v[0] = acc * inv;
  n.back = [a, inv](Graph& g, Node& self) {
    if (!g.node(a).needs_grad) return;
    const double gseed = self.grad.v[0] * inv;
    for (double& x : g.node(a).grad.v) x += gseed;
  };
  return push(std::move(n));
}

int Graph::layernorm(int x, int gain, int bias) {
  const Tensor& tx = val(x);
  const int64_t R = tx.rows(), C = tx.cols();
  require(val(gain).size() == C && val(bias).size() == C, "Graph::layernorm: affine size mismatch");
  Node n;
  n.needs_grad = node(x).needs_grad || node(gain).needs_grad || node(bias).needs_grad;
  n.val = Tensor({R, C});
  Tensor xh({R, C});   // normalized pre-affine, kept for backward
  Tensor istd({R});
  const Tensor& g_ = val(gain);
  const Tensor& b_ = val(bias);
  for (int64_t r = 0; r < R; ++r) {
    double mu = 0.0;
    for (int64_t c = 0; c < C; ++c) mu += tx.at(r, c);
    mu /= static_cast<double>(C);
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      const double d = tx.at(r, c) - mu;
      var += d * d;
    }
    var /= static_cast<double>(C);
    const double is = 1.0 / std::sqrt(var + kLnEps);
    istd.v[static_cast<size_t>(r)] = is;
    for (int64_t c = 0; c < C; ++c) {
      const double h = (tx.at(r, c) - mu) * is;
      xh.at(r, c) = h;
      n.val.at(r, c) = h * g_.v[static_cast<size_t>(c)] + b_.v[static_cast<size_t>(c)];
    }
  }
  n.back = [x, gain, bias, R, C, xh = std::move(xh), istd = std::move(istd)](Graph& g, Node& self) {
    const Tensor& gv = g.node(gain).val;
    for (int64_t r = 0; r < R; ++r) {
      if (g.node(gain).needs_grad || g.node(bias).needs_grad) {
        for (int64_t c = 0; c < C; ++c) {
          const double go = self.grad.at(r, c);
          if (g.node(gain).needs_grad) g.node(gain).grad.v[static_cast<size_t>(c)] += go * xh.at(r, c);
          if (g.node(bias).needs_grad) g.node(bias).grad.v[static_cast<size_t>(c)] += go;
        }
      }
      if (g.node(x).needs_grad) {
        // dx = istd/C * (C*dh - sum(dh) - xh * sum(dh*xh)), dh = go*gain
        double s1 = 0.0, s2 = 0.0;
        for (int64_t c = 0; c < C; ++c) {
          const double dh = self.grad.at(r, c) * gv.v[static_cast<size_t>(c)];
          s1 += dh;
          s2 += dh * xh.at(r, c);
        }
        const double is = istd.v[static_cast<size_t>(r)];
        for (int64_t c = 0; c < C; ++c) {
          const double dh = self.grad.at(r, c) * gv.v[static_cast<size_t>(c)];
          g.node(x).grad.at(r, c) +=
              is * (dh - (s1 + xh.at(r, c) * s2) / static_cast<double>(C));
        }
      }
    }
  };
  return push(std::move(n));
}

int Graph::softmax_rows(int x) {
  const Tensor& tx = val(x);
  CARAT_UNARY_PROLOGUE(x)
  const int64_t R = tx.rows(), C = tx.cols();
  n.val = Tensor({R, C});
  for (int64_t r = 0; r < R; ++r) {
    double mx = tx.at(r, 0);
    for (int64_t c = 1; c < C; ++c) mx = std::max(mx, tx.at(r, c));
    double z = 0.0;
    for (int64_t c = 0; c < C; ++c) {
      const double e = std::exp(tx.at(r, c) - mx);
      n.val.at(r, c) = e;
      z += e;
    }
    for (int64_t c = 0; c < C; ++c) n.val.at(r, c) /= z;
  }
  n.back = [x, R, C](Graph& g, Node& self) {
    if (!g.node(x).needs_grad) return;
    for (int64_t r = 0; r < R; ++r) {
      double dot = 0.0;
      for (int64_t c = 0; c < C; ++c) dot += self.grad.at(r, c) * self.val.at(r, c);
      for (int64_t c = 0; c < C; ++c)
        g.node(x).grad.at(r, c) += self.val.at(r, c) * (self.grad.at(r, c) - dot);
    }
  };
  return push(std::move(n));
}

int Graph::attention(int q, int k, int v, int64_t batch, int64_t tokens, int64_t heads) {
  const Tensor& tq = val(q);
  const int64_t W = tq.cols();
  require(tq.rows() == batch * tokens, "Graph::attention: row count != batch*tokens");
  require(W % heads == 0, "Graph::attention: width not divisible by heads");
  require(val(k).same_shape(tq) && val(v).same_shape(tq), "Graph::attention: q/k/v shape mismatch");
  Node n;
  n.needs_grad = node(q).needs_grad || node(k).needs_grad || node(v).needs_grad;
  const int64_t dh = W / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  n.val = Tensor({batch * tokens, W});
  // Attention probabilities are kept for the backward pass.
  Tensor probs({batch * heads, tokens, tokens});
  const Tensor& tk = val(k);
  const Tensor& tv = val(v);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t h = 0; h < heads; ++h) {
      double* A = &probs.v[static_cast<size_t>(((b * heads) + h) * tokens * tokens)];
      for (int64_t i = 0; i < tokens; ++i) {
        const double* qi = &tq.v[static_cast<size_t>((b * tokens + i) * W + h * dh)];
        double mx = -1e300;
        for (int64_t j = 0; j < tokens; ++j) {
          const double* kj = &tk.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
          double s = 0.0;
          for (int64_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
          s *= sc;
          A[i * tokens + j] = s;
          mx = std::max(mx, s);
        }
        double z = 0.0;
        for (int64_t j = 0; j < tokens; ++j) {
          const double e = std::exp(A[i * tokens + j] - mx);
          A[i * tokens + j] = e;
          z += e;
        }
        double* out = &n.val.v[static_cast<size_t>((b * tokens + i) * W + h * dh)];
        for (int64_t j = 0; j < tokens; ++j) {
          A[i * tokens + j] /= z;
          const double a = A[i * tokens + j];
          const double* vj = &tv.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
          for (int64_t c = 0; c < dh; ++c) out[c] += a * vj[c];
        }
      }
    }
  }
  n.back = [q, k, v, batch, tokens, heads, dh, sc, W, probs = std::move(probs)](Graph& g, Node& self) {
    const Tensor& tq = g.node(q).val;
    const Tensor& tk = g.node(k).val;
    const Tensor& tv = g.node(v).val;
    const bool gq = g.node(q).needs_grad, gk = g.node(k).needs_grad, gv = g.node(v).needs_grad;
    std::vector<double> dA(static_cast<size_t>(tokens * tokens));
    for (int64_t b = 0; b < batch; ++b) {
      for (int64_t h = 0; h < heads; ++h) {
        const double* A = &probs.v[static_cast<size_t>(((b * heads) + h) * tokens * tokens)];
        // dV[j] += sum_i A[i][j] * dO[i];  dA[i][j] = dO[i] . V[j]
        for (int64_t i = 0; i < tokens; ++i) {
          const double* dOi = &self.grad.v[static_cast<size_t>((b * tokens + i) * W + h * dh)];
          for (int64_t j = 0; j < tokens; ++j) {
            const double* vj = &tv.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
            double acc = 0.0;
            for (int64_t c = 0; c < dh; ++c) acc += dOi[c] * vj[c];
            dA[static_cast<size_t>(i * tokens + j)] = acc;
            if (gv) {
              double* dvj = &g.node(v).grad.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
              const double a = A[i * tokens + j];
              for (int64_t c = 0; c < dh; ++c) dvj[c] += a * dOi[c];
            }
          }
        }
        if (!gq && !gk) continue;
        // dS[i][j] = A[i][j] * (dA[i][j] - sum_l dA[i][l] A[i][l]); dQ = dS K sc; dK = dS^T Q sc
        for (int64_t i = 0; i < tokens; ++i) {
          double dot = 0.0;
          for (int64_t l = 0; l < tokens; ++l)
            dot += dA[static_cast<size_t>(i * tokens + l)] * A[i * tokens + l];
          const double* qi = &tq.v[static_cast<size_t>((b * tokens + i) * W + h * dh)];
          double* dqi = gq ? &g.node(q).grad.v[static_cast<size_t>((b * tokens + i) * W + h * dh)] : nullptr;
          for (int64_t j = 0; j < tokens; ++j) {
            const double ds = A[i * tokens + j] * (dA[static_cast<size_t>(i * tokens + j)] - dot) * sc;
            const double* kj = &tk.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
            if (gq)
              for (int64_t c = 0; c < dh; ++c) dqi[c] += ds * kj[c];
            if (gk) {
              double* dkj = &g.node(k).grad.v[static_cast<size_t>((b * tokens + j) * W + h * dh)];
              for (int64_t c = 0; c < dh; ++c) dkj[c] += ds * qi[c];
            }
          }
        }
      }
    }
  };
  return push(std::move(n));
}

int Graph::bilinear(int x, int z, int w3, int bias) {
  const Tensor& tx = val(x);
  const Tensor& tz = val(z);
  const Tensor& tw = val(w3);
  require(tw.shape.size() == 3, "Graph::bilinear: weight must be 3-D");
  const int64_t R = tx.rows(), O = tw.shape[0], P = tw.shape[1], Q = tw.shape[2];
  require(tx.cols() == P && tz.cols() == Q && tz.rows() == R, "Graph::bilinear: shape mismatch");
  require(val(bias).size() == O, "Graph::bilinear: bias size mismatch");
  Node n;
  n.needs_grad = node(x).needs_grad || node(z).needs_grad || node(w3).needs_grad || node(bias).needs_grad;
  n.val = Tensor({R, O});
  const Tensor& tb = val(bias);
  for (int64_t r = 0; r < R; ++r) {
    const double* xr = &tx.v[static_cast<size_t>(r * P)];
    const double* zr = &tz.v[static_cast<size_t>(r * Q)];
    for (int64_t o = 0; o < O; ++o) {
      const double* Wo = &tw.v[static_cast<size_t>(o * P * Q)];
      double acc = 0.0;
      for (int64_t p = 0; p < P; ++p) {
        const double* wrow = Wo + p * Q;
        double s = 0.0;
        for (int64_t qq = 0; qq < Q; ++qq) s += wrow[qq] * zr[qq];
        acc += xr[p] * s;
      }
      n.val.at(r, o) = acc + tb.v[static_cast<size_t>(o)];
    }
  }
  n.back = [x, z, w3, bias, R, O, P, Q](Graph& g, Node& self) {
    const Tensor& tx = g.node(x).val;
    const Tensor& tz = g.node(z).val;
    const Tensor& tw = g.node(w3).val;
    const bool gx = g.node(x).needs_grad, gz = g.node(z).needs_grad;
    const bool gw = g.node(w3).needs_grad, gb = g.node(bias).needs_grad;
    for (int64_t r = 0; r < R; ++r) {
      const double* xr = &tx.v[static_cast<size_t>(r * P)];
      const double* zr = &tz.v[static_cast<size_t>(r * Q)];
      for (int64_t o = 0; o < O; ++o) {
        const double go = self.grad.at(r, o);
        if (go == 0.0) continue;
        if (gb) g.node(bias).grad.v[static_cast<size_t>(o)] += go;
        const double* Wo = &tw.v[static_cast<size_t>(o * P * Q)];
        double* dWo = gw ? &g.node(w3).grad.v[static_cast<size_t>(o * P * Q)] : nullptr;
        for (int64_t p = 0; p < P; ++p) {
          const double* wrow = Wo + p * Q;
          double s = 0.0;
          for (int64_t qq = 0; qq < Q; ++qq) {
            s += wrow[qq] * zr[qq];
            if (gw) dWo[p * Q + qq] += go * xr[p] * zr[qq];
            if (gz) g.node(z).grad.v[static_cast<size_t>(r * Q + qq)] += go * xr[p] * wrow[qq];
          }
          if (gx) g.node(x).grad.v[static_cast<size_t>(r * P + p)] += go * s;
        }
      }
    }
  };
  return push(std::move(n));
}

int Graph::softmax_xent(int logits, std::vector<int64_t> targets) {
  const Tensor& tl = val(logits);
  const int64_t R = tl.rows(), C = tl.cols();
  require(static_cast<int64_t>(targets.size()) == R, "Graph::softmax_xent: target count != rows");
  CARAT_UNARY_PROLOGUE(logits)
  n.val = Tensor({1});
  Tensor probs({R, C});
  double loss = 0.0;
  for (int64_t r = 0; r < R; ++r) {
    require(targets[static_cast<size_t>(r)] >= 0 && targets[static_cast<size_t>(r)] < C,
            "Graph::softmax_xent: target out of range");
    double mx = tl.at(r, 0);
    for (int64_t c = 1; c < C; ++c) mx = std::max(mx, tl.at(r, c));
    double z = 0.0;
    for (int64_t c = 0; c < C; ++c) z += std::exp(tl.at(r, c) - mx);
    const double lz = std::log(z) + mx;
    loss += lz - tl.at(r, targets[static_cast<size_t>(r)]);
    for (int64_t c = 0; c < C; ++c) probs.at(r, c) = std::exp(tl.at(r, c) - lz);
  }
  n.val.v[0] = loss / static_cast<double>(R);
  n.back = [logits, R, C, targets = std::move(targets), probs = std::move(probs)](Graph& g, Node& self) {
    if (!g.node(logits).needs_grad) return;
    const double gseed = self.grad.v[0] / static_cast<double>(R);
    for (int64_t r = 0; r < R; ++r)
      for (int64_t c = 0; c < C; ++c) {
        const double delta = (c == targets[static_cast<size_t>(r)]) ? 1.0 : 0.0;
        g.node(logits).grad.at(r, c) += gseed * (probs.at(r, c) - delta);
      }
  };
  return push(std::move(n));
}

int Graph::bce_logits(int logits, std::vector<double> labels) {
  const Tensor& tl = val(logits);
  const int64_t N = tl.size();
  require(static_cast<int64_t>(labels.size()) == N, "Graph::bce_logits: label count != elements");
  CARAT_UNARY_PROLOGUE(logits)
  n.val = Tensor({1});
  double loss = 0.0;
  for (int64_t i = 0; i < N; ++i) {
    const double z = tl.v[static_cast<size_t>(i)];
    const double y = labels[static_cast<size_t>(i)];
    loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  n.val.v[0] = loss / static_cast<double>(N);
  n.back = [logits, N, labels = std::move(labels)](Graph& g, Node& self) {
    if (!g.node(logits).needs_grad) return;
    const double gseed = self.grad.v[0] / static_cast<double>(N);
    for (int64_t i = 0; i < N; ++i) {
      const double z = g.node(logits).val.v[static_cast<size_t>(i)];
      const double s = 1.0 / (1.0 + std::exp(-z));
      g.node(logits).grad.v[static_cast<size_t>(i)] += gseed * (s - labels[static_cast<size_t>(i)]);
    }
  };
  return push(std::move(n));
}

void Graph::backward(int node_idx) {
  Node& top = node(node_idx);
  require(top.val.size() == 1, "Graph::backward: seed node must be scalar");
  for (Node& n : nodes_)
    if (n.needs_grad && n.grad.v.empty()) n.grad = Tensor(n.val.shape);
  top.grad = Tensor(top.val.shape);
  top.grad.v[0] = 1.0;
  for (int i = node_idx; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.needs_grad && n.back) n.back(*this, n);
  }
}

}  // namespace carat::nn

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
#include <cmath>
#include <functional>
#include <vector>

#include "carat/nn/adam.hpp"
#include "carat/nn/graph.hpp"
#include "carat/rng.hpp"
#include "doctest.h"
#include "support.hpp"

using carat::Rng;
using carat::nn::Adam;
using carat::nn::Graph;
using carat::nn::Param;
using carat::nn::Tensor;
using carat::testing::check_grads;
using carat::testing::fill_away_from_zero;

TEST_CASE("elementwise op gradients") {
  Rng rng(11);
  Param a("a", {3, 4}), b("b", {3, 4});
  fill_away_from_zero(a, rng);
  fill_away_from_zero(b, rng);

  check_grads({&a, &b}, [&](Graph& g) {
    return g.mean_all(g.mul(g.add(g.param(a), g.param(b)), g.param(b)));
  });
  check_grads({&a}, [&](Graph& g) { return g.mean_all(g.relu(g.param(a))); });
  check_grads({&a}, [&](Graph& g) { return g.mean_all(g.gelu(g.param(a))); });
  check_grads({&a}, [&](Graph& g) { return g.mean_all(g.tanh_(g.param(a))); });
  check_grads({&a}, [&](Graph& g) { return g.mean_all(g.sigmoid(g.param(a))); });
  check_grads({&a}, [&](Graph& g) {
    return g.mean_all(g.add_const(g.scale(g.param(a), -1.7), 0.3));
  });
}

TEST_CASE("matmul and bias gradients") {
  Rng rng(12);
  Param a("a", {3, 4}), b("b", {4, 2}), bias("bias", {2});
  fill_away_from_zero(a, rng);
  fill_away_from_zero(b, rng);
  fill_away_from_zero(bias, rng);
  check_grads({&a, &b, &bias}, [&](Graph& g) {
    return g.mean_all(g.add_bias(g.matmul(g.param(a), g.param(b)), g.param(bias)));
  });
}

TEST_CASE("shape op gradients") {
  Rng rng(13);
  Param a("a", {3, 4}), b("b", {3, 2}), c("c", {2, 4});
  fill_away_from_zero(a, rng);
  fill_away_from_zero(b, rng);
  fill_away_from_zero(c, rng);

  check_grads({&a, &b}, [&](Graph& g) {
    return g.mean_all(g.concat_cols(g.param(a), g.param(b)));
  });
  check_grads({&a, &c}, [&](Graph& g) {
    return g.mean_all(g.concat_rows({g.param(a), g.param(c)}));
  });
  check_grads({&a}, [&](Graph& g) {
    const int x = g.param(a);
    return g.mean_all(g.mul(g.slice_cols(x, 1, 3), g.slice_cols(x, 0, 2)));
  });
  // repeated indices exercise the scatter-add in the backward pass
  check_grads({&a}, [&](Graph& g) {
    return g.mean_all(g.rows(g.param(a), {2, 0, 2, 1, 2}));
  });
  check_grads({&a}, [&](Graph& g) { return g.mean_all(g.sum_groups(g.param(a), 3)); });
  check_grads({&a}, [&](Graph& g) {
    return g.mean_all(g.mul(g.row_sum(g.param(a)), g.row_sum(g.param(a))));
  });
}

TEST_CASE("layernorm and softmax gradients") {
  Rng rng(14);
  Param x("x", {3, 5}), gain("gain", {5}), bias("bias", {5});
  fill_away_from_zero(x, rng);
  for (double& v : gain.value.v) v = rng.uniform(0.5, 1.5);
  fill_away_from_zero(bias, rng);

  check_grads({&x, &gain, &bias}, [&](Graph& g) {
    return g.mean_all(g.layernorm(g.param(x), g.param(gain), g.param(bias)));
  });
  check_grads({&x}, [&](Graph& g) {
    const int s = g.softmax_rows(g.param(x));
    return g.mean_all(g.mul(s, s));
  });
}

TEST_CASE("attention gradients") {
  Rng rng(15);
  const int64_t batch = 2, tokens = 3, width = 4, heads = 2;
  Param q("q", {batch * tokens, width}), k("k", {batch * tokens, width}),
      v("v", {batch * tokens, width});
  fill_away_from_zero(q, rng);
  fill_away_from_zero(k, rng);
  fill_away_from_zero(v, rng);
  check_grads({&q, &k, &v}, [&](Graph& g) {
    const int o = g.attention(g.param(q), g.param(k), g.param(v), batch, tokens, heads);
    return g.mean_all(g.mul(o, o));
  });
}

TEST_CASE("bilinear gradients") {
  Rng rng(16);
  Param x("x", {3, 2}), z("z", {3, 4}), w("w", {2, 2, 4}), b("b", {2});
  fill_away_from_zero(x, rng);
  fill_away_from_zero(z, rng);
  fill_away_from_zero(w, rng);
  fill_away_from_zero(b, rng);
  check_grads({&x, &z, &w, &b}, [&](Graph& g) {
    return g.mean_all(g.bilinear(g.param(x), g.param(z), g.param(w), g.param(b)));
  });
}

TEST_CASE("loss gradients") {
  Rng rng(17);
  Param logits("logits", {3, 4});
  fill_away_from_zero(logits, rng);
  check_grads({&logits}, [&](Graph& g) {
    return g.softmax_xent(g.param(logits), {1, 3, 0});
  });

  Param z("z", {5, 1});
  fill_away_from_zero(z, rng);
  check_grads({&z}, [&](Graph& g) {
    return g.bce_logits(g.param(z), {1.0, 0.0, 1.0, 0.0, 1.0});
  });
}

TEST_CASE("composite network gradient") {
  Rng rng(18);
  const int64_t batch = 2, tokens = 3, d = 4;
  Param emb("emb", {batch * tokens, d}), wq("wq", {d, d}), wk("wk", {d, d}), wv("wv", {d, d}),
      gain("gain", {d}), bias("bias", {d}), head("head", {d, 2});
  for (Param* p : {&emb, &wq, &wk, &wv, &head}) fill_away_from_zero(*p, rng);
  for (double& v : gain.value.v) v = rng.uniform(0.5, 1.5);
  fill_away_from_zero(bias, rng);

  check_grads({&emb, &wq, &wk, &wv, &gain, &bias, &head}, [&](Graph& g) {
    const int e = g.param(emb);
    const int att = g.attention(g.matmul(e, g.param(wq)), g.matmul(e, g.param(wk)),
                                g.matmul(e, g.param(wv)), batch, tokens, 2);
    const int ln = g.layernorm(g.add(e, att), g.param(gain), g.param(bias));
    const int logits = g.matmul(g.gelu(ln), g.param(head));
    return g.softmax_xent(logits, {0, 1, 1, 0, 1, 0});
  });
}

TEST_CASE("frozen params receive no gradient and match param values") {
  Rng rng(19);
  Param a("a", {2, 3}), w("w", {3, 2});
  fill_away_from_zero(a, rng);
  fill_away_from_zero(w, rng);
  a.grad.zero();
  w.grad.zero();

  double loss_frozen, loss_param;
  {
    Graph g;
    const int l = g.mean_all(g.matmul(g.frozen(a), g.param(w)));
    loss_frozen = g.scalar(l);
    g.backward(l);
  }
  for (double gv : a.grad.v) CHECK(gv == 0.0);
  bool w_has_grad = false;
  for (double gv : w.grad.v) w_has_grad = w_has_grad || gv != 0.0;
  CHECK(w_has_grad);

  w.grad.zero();
  {
    Graph g;
    loss_param = g.scalar(g.mean_all(g.matmul(g.param(a), g.param(w))));
  }
  CHECK(loss_frozen == loss_param);
}

TEST_CASE("adam matches closed form under constant unit gradient") {
  // With g == 1 at every step, bias-corrected mhat == vhat == 1, so each
  // step moves exactly lr / (1 + eps).
  Param p("p", {1});
  p.value.v[0] = 5.0;
  Adam opt(0.01);
  opt.attach({&p});
  for (int t = 0; t < 3; ++t) {
    p.grad.v[0] = 1.0;
    opt.step();
    CHECK(p.grad.v[0] == 0.0);
  }
  const double expect = 5.0 - 3.0 * 0.01 / (1.0 + 1e-8);
  CHECK(std::abs(p.value.v[0] - expect) < 1e-12);
}

TEST_CASE("adam descends a quadratic") {
  Param p("p", {2});
  p.value.v = {3.0, -2.0};
  Adam opt(0.05);
  opt.attach({&p});
  for (int t = 0; t < 500; ++t) {
    Graph g;
    const int x = g.param(p);
    const int loss = g.mean_all(g.mul(x, x));
    g.backward(loss);
    opt.step();
  }
  CHECK(std::abs(p.value.v[0]) < 1e-3);
  CHECK(std::abs(p.value.v[1]) < 1e-3);
}

TEST_CASE("rng determinism and draw contracts") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int64_t k = r.uniform_int(17);
    CHECK(k >= 0);
    CHECK(k < 17);
    const int64_t e = r.uniform_int_excluding(5, 2);
    CHECK(e >= 0);
    CHECK(e < 5);
    CHECK(e != 2);
  }

  std::vector<bool> seen(5, false);
  for (int i = 0; i < 200; ++i) seen[static_cast<size_t>(r.uniform_int_excluding(5, 2))] = true;
  CHECK(seen == std::vector<bool>({true, true, false, true, true}));

  auto s = r.sample_without_replacement(10, 4);
  CHECK(s.size() == 4);
  std::vector<bool> hit(10, false);
  for (int64_t x : s) {
    CHECK(x >= 0);
    CHECK(x < 10);
    CHECK(!hit[static_cast<size_t>(x)]);
    hit[static_cast<size_t>(x)] = true;
  }

  auto perm = r.permutation(20);
  std::vector<bool> ph(20, false);
  for (int64_t x : perm) ph[static_cast<size_t>(x)] = true;
  for (bool hbit : ph) CHECK(hbit);

  CHECK(Rng::derive(1, "ad") == Rng::derive(1, "ad"));
  CHECK(Rng::derive(1, "ad") != Rng::derive(1, "kge"));
  CHECK(Rng::derive(1, "ad") != Rng::derive(2, "ad"));
}

TEST_CASE("normal draws have unit moments") {
  Rng r(1234);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("xavier init is seed deterministic") {
  Param p("p", {8, 8}), q("q", {8, 8});
  Rng r1(99), r2(99);
  p.init_xavier(r1);
  q.init_xavier(r2);
  CHECK(p.value.v == q.value.v);
  const double bound = std::sqrt(6.0 / 16.0);
  for (double x : p.value.v) CHECK(std::abs(x) <= bound);
}

TEST_CASE("hex and fnv1a helpers") {
  CHECK(carat::to_hex(0) == "0000000000000000");
  CHECK(carat::to_hex(0xdeadbeefull) == "00000000deadbeef");
  CHECK(carat::from_hex("00000000deadbeef") == 0xdeadbeefull);
  CHECK(carat::from_hex(carat::to_hex(0x123456789abcdef0ull)) == 0x123456789abcdef0ull);
  CHECK_THROWS_AS(carat::from_hex("xyz"), carat::Error);

  CHECK(carat::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(carat::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

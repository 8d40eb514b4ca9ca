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
#pragma once

#include <functional>
#include <vector>

#include "carat/nn/tensor.hpp"

namespace carat::nn {

// Reverse-mode tape. One Graph instance is built per training step (or per
// inference batch); node handles are indices into the tape. Parameters enter
// via param() and receive gradients in Param::grad on backward(); frozen()
// enters the same data without gradient tracking, which prunes the whole
// upstream subgraph from the backward sweep.
class Graph {
 public:
  int input(Tensor t);
  int param(Param& p);
  int frozen(const Param& p);

  // elementwise / broadcast
  int add(int a, int b);                 // same shape
  int add_bias(int x, int bias);         // bias: (cols,) broadcast over rows
  int mul(int a, int b);                 // hadamard, same shape
  int scale(int a, double s);
  int add_const(int a, double c);
  int relu(int a);
  int gelu(int a);                       // exact erf form
  int tanh_(int a);
  int sigmoid(int a);

  // linear algebra / shape
  int matmul(int a, int b);              // (n,k) x (k,m)
  int concat_cols(int a, int b);
  int slice_cols(int a, int64_t c0, int64_t c1);
  int concat_rows(const std::vector<int>& parts);
  int rows(int a, std::vector<int64_t> idx);        // gather rows; backward scatter-adds
  int sum_groups(int a, int64_t group);             // (n,k) -> (n/group,k), consecutive rows
  int row_sum(int a);                                // (n,k) -> (n,1)
  int mean_all(int a);                               // -> scalar (1,)
  int layernorm(int x, int gain, int bias);          // per row; gain/bias (cols,)
  int softmax_rows(int x);

  // Batched multi-head self-attention. q,k,v: (batch*tokens, width) with
  // record-major rows; width split evenly over heads.
  int attention(int q, int k, int v, int64_t batch, int64_t tokens, int64_t heads);

  // out[r,o] = sum_{p,q} x[r,p] * w[o,p,q] * z[r,q] + bias[o]
  int bilinear(int x, int z, int w3, int bias);

  // losses (mean over rows, scalar result)
  int softmax_xent(int logits, std::vector<int64_t> targets);
  int bce_logits(int logits, std::vector<double> labels);

  const Tensor& val(int node) const { return nodes_[static_cast<size_t>(node)].val; }
  double scalar(int node) const { return val(node).v.at(0); }

  // Seeds d(node)=1 and sweeps the tape in reverse. `node` must be scalar.
  void backward(int node);

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    Param* bound = nullptr;
    std::function<void(Graph&, Node&)> back;  // pulls from node.grad into parents
  };

  int push(Node n);
  Node& node(int i) { return nodes_[static_cast<size_t>(i)]; }

  std::vector<Node> nodes_;
};

}  // namespace carat::nn

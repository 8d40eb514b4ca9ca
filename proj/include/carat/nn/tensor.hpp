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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "carat/rng.hpp"
#include "carat/util.hpp"

namespace carat::nn {

// Dense row-major tensor of doubles. 1-D, 2-D and 3-D shapes are used.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel(shape)), 0.0);
  }

  static int64_t numel(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int64_t rows() const { return shape.empty() ? 1 : shape[0]; }
  int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(int64_t r, int64_t c) { return v[static_cast<size_t>(r * cols() + c)]; }
  double at(int64_t r, int64_t c) const { return v[static_cast<size_t>(r * cols() + c)]; }

  void zero() { std::fill(v.begin(), v.end(), 0.0); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// A named, trainable parameter. Gradients accumulate into `grad` during
// Graph::backward and are consumed (then cleared) by the optimizer.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<int64_t> shape) : name(std::move(n)), value(shape), grad(shape) {}

  void init_xavier(Rng& rng) {
    const int64_t fan_in = value.shape.size() >= 2 ? value.shape[value.shape.size() - 2] : value.cols();
    const int64_t fan_out = value.shape.empty() ? 1 : value.shape.back();
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : value.v) x = rng.uniform(-a, a);
  }

  void init_normal(Rng& rng, double stddev) {
    for (double& x : value.v) x = rng.normal() * stddev;
  }

  void init_const(double c) { std::fill(value.v.begin(), value.v.end(), c); }
};

}  // namespace carat::nn

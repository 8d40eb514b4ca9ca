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

#include <cmath>
#include <vector>

#include "carat/nn/tensor.hpp"

namespace carat::nn {

// Adam with bias correction. step() consumes and clears the accumulated
// gradients of every registered parameter.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(std::vector<Param*> params) {
    params_ = std::move(params);
    m_.clear();
    v_.clear();
    for (const Param* p : params_) {
      m_.emplace_back(p->value.shape);
      v_.emplace_back(p->value.shape);
    }
    t_ = 0;
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
      Param& p = *params_[i];
      for (size_t j = 0; j < p.value.v.size(); ++j) {
        const double g = p.grad.v[j];
        m_[i].v[j] = beta1_ * m_[i].v[j] + (1.0 - beta1_) * g;
        v_[i].v[j] = beta2_ * v_[i].v[j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i].v[j] / c1;
        const double vhat = v_[i].v[j] / c2;
        p.value.v[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
      p.grad.zero();
    }
  }

  double lr() const { return lr_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<Param*> params_;
  std::vector<Tensor> m_, v_;
  int64_t t_ = 0;
};

}  // namespace carat::nn

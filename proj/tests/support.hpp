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
#include <functional>
#include <vector>

#include "carat/nn/graph.hpp"
#include "carat/rng.hpp"
#include "doctest.h"

namespace carat::testing {

// Fills a param with values bounded away from zero so piecewise ops
// (relu) are differentiable at every probe point.
inline void fill_away_from_zero(nn::Param& p, Rng& rng) {
  for (double& x : p.value.v) {
    x = rng.uniform(-1.0, 1.0);
    if (std::abs(x) < 0.05) x += (x >= 0.0 ? 0.1 : -0.1);
  }
}

// Largest relative error between analytic gradients (one backward sweep)
// and central finite differences over every element of every param.
inline double max_grad_rel_error(const std::vector<nn::Param*>& params,
                                 const std::function<int(nn::Graph&)>& build) {
  for (nn::Param* p : params) p->grad.zero();
  {
    nn::Graph g;
    const int loss = build(g);
    g.backward(loss);
  }
  std::vector<nn::Tensor> analytic;
  analytic.reserve(params.size());
  for (nn::Param* p : params) analytic.push_back(p->grad);

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    nn::Param& p = *params[pi];
    for (size_t j = 0; j < p.value.v.size(); ++j) {
      const double x0 = p.value.v[j];
      const double h = 1e-5 * std::max(1.0, std::abs(x0));
      p.value.v[j] = x0 + h;
      double lp;
      {
        nn::Graph g;
        lp = g.scalar(build(g));
      }
      p.value.v[j] = x0 - h;
      double lm;
      {
        nn::Graph g;
        lm = g.scalar(build(g));
      }
      p.value.v[j] = x0;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = analytic[pi].v[j];
      const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      worst = std::max(worst, rel);
    }
  }
  for (nn::Param* p : params) p->grad.zero();
  return worst;
}

inline void check_grads(const std::vector<nn::Param*>& params,
                        const std::function<int(nn::Graph&)>& build, double tol = 1e-5) {
  const double worst = max_grad_rel_error(params, build);
  CAPTURE(worst);
  CHECK(worst < tol);
}

}  // namespace carat::testing

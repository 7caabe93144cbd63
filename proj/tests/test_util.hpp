// Copyright 2026 The Revelight Authors. All Rights Reserved.
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
#include <span>
#include <vector>

#include "revelight/models.hpp"
#include "revelight/rng.hpp"

namespace testutil {

// Central finite-difference gradient.
inline std::vector<double> fd_grad(const std::function<double(std::span<const double>)>& f,
                                   std::vector<double> w, double h = 1e-6) {
  std::vector<double> g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double keep = w[j];
    w[j] = keep + h;
    const double up = f(w);
    w[j] = keep - h;
    const double down = f(w);
    w[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  revelight::Stream s(seed, 99, revelight::Purpose::kInstance, 0);
  std::vector<double> v(n);
  for (double& x : v) x = scale * s.normal();
  return v;
}

// Small dense dataset with +-1 labels and Gaussian features.
inline revelight::Dataset toy_dataset(std::size_t n, std::size_t dim, std::uint64_t seed) {
  revelight::Dataset d;
  d.n = n;
  d.dim = dim;
  d.features = normals(n * dim, seed);
  revelight::Stream s(seed, 98, revelight::Purpose::kInstance, 0);
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(s.uniform() < 0.5 ? -1 : 1);
  return d;
}

}  // namespace testutil

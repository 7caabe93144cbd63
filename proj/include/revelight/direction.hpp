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

#include <cstddef>
#include <string_view>

#include "revelight/models.hpp"
#include "revelight/rng.hpp"

namespace revelight {

enum class Scheme { kGaussian, kSphere };

std::string_view to_string(Scheme s);
/// Accepts "gaussian"/"gau" and "sphere"/"uni". Throws ConfigError otherwise.
Scheme parse_scheme(std::string_view text);

/// A random perturbation direction u.
struct Direction {
  Vec u;
  Scheme scheme = Scheme::kGaussian;

  std::size_t dim() const { return u.size(); }
};

/// Gaussian: dim i.i.d. N(0,1) draws. Sphere: the same draws normalised to
/// unit length. Throws DomainError for dim == 0.
Direction sample_direction(Scheme scheme, std::size_t dim, Stream& stream);
void sample_direction_into(Scheme scheme, Stream& stream, std::span<double> out);

/// Prefactor k in (k / mu) [f(w + mu u) - f(w)] u that makes the two-point
/// estimator unbiased for the gradient of the smoothed function: 1 for
/// Gaussian directions, dim for directions on the unit sphere.
double zoe_prefactor(Scheme scheme, std::size_t dim);

}  // namespace revelight

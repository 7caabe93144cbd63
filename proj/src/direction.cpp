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

#include "revelight/direction.hpp"

#include <cmath>
#include <string>

#include "revelight/errors.hpp"

namespace revelight {

std::string_view to_string(Scheme s) {
  return s == Scheme::kGaussian ? "gaussian" : "sphere";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "gaussian" || text == "gau") return Scheme::kGaussian;
  if (text == "sphere" || text == "uni") return Scheme::kSphere;
  throw ConfigError("unknown smoothing scheme '" + std::string(text) + "'");
}

void sample_direction_into(Scheme scheme, Stream& stream, std::span<double> out) {
  if (out.empty()) throw DomainError("direction dimension must be positive");
  double sq = 0.0;
  for (double& v : out) {
    v = stream.normal();
    sq += v * v;
  }
  if (scheme == Scheme::kSphere) {
    const double norm = std::sqrt(sq);
    for (double& v : out) v /= norm;
  }
}

Direction sample_direction(Scheme scheme, std::size_t dim, Stream& stream) {
  Direction d;
  d.scheme = scheme;
  d.u.resize(dim);
  sample_direction_into(scheme, stream, d.u);
  return d;
}

double zoe_prefactor(Scheme scheme, std::size_t dim) {
  return scheme == Scheme::kGaussian ? 1.0 : static_cast<double>(dim);
}

}  // namespace revelight

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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "revelight/direction.hpp"
#include "revelight/kernels.hpp"

namespace revelight {

struct SmoothingConfig {
  std::vector<double> mu;  // one radius per parameter block, all > 0
  Scheme scheme = Scheme::kGaussian;

  void validate() const;
};

struct HyperParams {
  double eta = 0.0;
  double eta_server = 0.0;
  std::size_t horizon = 0;  // T
  std::size_t tau = 0;
  double m0 = 1.0;
  double lipschitz = 1.0;
  double d_star = 0.0;
  std::vector<double> mu;  // per block, same order as the `dims` argument
};

/// Party-side block estimate
///
///   (k / mu) * [(h_bar + lambda * g(w + mu u)) - (h + lambda * g(w))] * u
///
/// where h = F0 at the current outputs, h_bar = F0 with this party's output
/// perturbed, and k = zoe_prefactor(u.scheme, dim). Throws DomainError for
/// mu <= 0.
Vec client_block_zoe(double h, double h_bar, double reg_at_w, double reg_at_perturbed,
                     double lambda_eff, double mu, const Direction& u);

/// Server-side estimate (k / mu) * (h_hat - h) * u0 for the global weights.
/// Returns nullopt when the global model has no parameters (d0 == 0).
std::optional<Vec> server_block_zoe(double h, double h_hat, double mu,
                                    const Direction& u0);

using kernels::McGrad;
using kernels::McValue;
using kernels::ScalarFn;

McValue smoothed_value_mc(const ScalarFn& f, std::span<const double> w, double mu,
                          Scheme scheme, std::size_t draws, std::uint64_t seed);
McGrad smoothed_grad_mc(const ScalarFn& f, std::span<const double> w, double mu,
                        Scheme scheme, std::size_t draws, std::uint64_t seed);

/// Step size and smoothing radii that give the O(1/sqrt(T)) guarantee:
///   eta = min(1 / (4 (tau + 1) L), m0 / sqrt(T)),
///   mu  = 1 / (sqrt(T) L d*^{3/2})  with d* = max d_m + 3   (gaussian)
///   mu  = 1 / (sqrt(T) L d*)        with d* = max d_m       (sphere).
/// `dims` lists every trainable block (zero-sized blocks are ignored). The
/// server step is eta / q with q = number of local blocks (dims.size() - 1
/// when `has_server_block`, else dims.size()).
HyperParams prescribe_hyperparams(std::size_t horizon, std::size_t tau, double lipschitz,
                                  double m0, std::span<const std::size_t> dims,
                                  Scheme scheme, bool has_server_block = false);

/// Largest ratio |grad f(a) - grad f(b)| / |a - b| over `pairs` random point
/// pairs around `center`, with gradients from central finite differences.
double estimate_lipschitz(const ScalarFn& f, std::span<const double> center,
                          std::uint64_t seed, std::size_t pairs = 64,
                          double radius = 1.0);

}  // namespace revelight
